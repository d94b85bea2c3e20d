"""Weitzenbock identity and refined Kato inequality on harmonic-Weyl models."""
from curv4 import check_refined_kato, check_weitzenbock, get_entry
from curv4.errors import NonHarmonicWeylError

for name, p in [("cp2", [0.3, -0.2, 0.5, 0.1]), ("schwarzschild", [1.0, 4.0, 1.2, 0.7])]:
    w = check_weitzenbock(get_entry(name).metric, p)
    t = w.plus
    print(f"{name:14} Laplacian {t.laplacian:+.6f} = 2|grad|^2 {t.gradient_term:+.6f}"
          f" + s|W|^2 {t.scalar_term:+.6f} + det {t.det_term:+.6f}  (residual {t.residual:.1e})")

m = get_entry("schwarzschild").metric
k = check_refined_kato(m, m.halton_points(8, margin_frac=0.2))
print(f"refined Kato margins on Schwarzschild: worst {k.worst_margin:.2e} over {k.evaluated} points")

try:
    check_weitzenbock(get_entry("s4-perturbed").metric, [0.2, 0.1, 0.0, 0.3])
except NonHarmonicWeylError as exc:
    print("s4-perturbed:", exc)
