"""Bracket the first Laplace eigenvalue and feed it to the manifold-level report."""
from curv4 import get_entry, lambda1_estimate, pinch_report

for name in ["s4", "t4", "s1xs3"]:
    est = lambda1_estimate(get_entry(name), trial_budget=6)
    print(f"{name:6} lambda1 in [{est.lower:.6f} ({est.lower_source}), {est.upper:.6f}]  rho {est.rho:.4f}"
          f"  volume {est.volume:.5f}")

rep = pinch_report(get_entry("s4", r=3**0.5), grid=3)
print(f"\nunit-Ricci sphere: inf K1perp {rep.inf_k1perp:.6f}, threshold {rep.thresholds.new_threshold:.6f}")
print("verdicts:", rep.verdicts)
