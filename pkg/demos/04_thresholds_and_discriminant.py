"""Pinching thresholds and the sign of the discriminant of the auxiliary quadratic."""
import math

from curv4 import PinchInputs, discriminant_analysis, thresholds
from curv4.pinch import algebraic_suite, discriminant_suite

# unit-Ricci round sphere: s = 4, lambda1 = 4/3
t = thresholds(4.0, 4.0 / 3.0, rho=1.0)
print(f"new threshold {t.new_threshold:.6f}  older threshold {t.old_threshold:.6f}  (K1perp = 1/3)")
print(f"normalized constants: {t.yang_constant:.7f}  {t.costa_constant:.5f}")

for pi in [PinchInputs(4.0, 4 / 3, 1 / 3, 0.0, 0.0), PinchInputs(12.0, 4.0, 0.6, 0.5, 0.3),
           PinchInputs(1.0, 1.0, 0.0, 3.0, 0.1)]:
    v = discriminant_analysis(pi)
    print(f"{pi}\n  discriminant {v.quadratic.discriminant:+.4e} -> {v.verdict}")

alg = algebraic_suite(n=20_000)
print(f"\nrandom trace-free operators: {alg.det_violations} determinant-bound violations in {alg.samples}")
ds = discriminant_suite(n=5_000)
print(f"random pinched tuples: max discriminant {ds.max_discriminant:+.2e}, {ds.claim_violations} violations")
print("sqrt(6) =", math.sqrt(6))
