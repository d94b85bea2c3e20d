"""Scalar curvature, Einstein residual and Weyl eigenvalues for every catalog model."""
import numpy as np

from curv4 import curvature_at, curvature_blocks, get_entry, weyl_spectrum
from curv4.catalog import catalog

print(f"{'model':14} {'s':>9} {'|Ric-sg/4|':>11}  W+ eigenvalues              W- eigenvalues")
for entry in catalog():
    m = entry.metric
    p = m.halton_points(1, margin_frac=0.2)[0]
    rap = curvature_at(m, p)
    ws = weyl_spectrum(curvature_blocks(rap))
    fmt = lambda w: "(" + ", ".join(f"{round(x, 4) + 0.0:+.4f}" for x in w) + ")"
    print(f"{entry.name:14} {round(rap.s, 4) + 0.0:9.4f} {rap.einstein_residual():11.2e}  {fmt(ws.wplus):27} {fmt(ws.wminus)}")

# a product of unequal spheres is not Einstein, and the B block says so
rap = curvature_at(get_entry("s2xs2", a=1.0, b=2.0).metric, [1.0, 0.5, 2.0, 3.0])
print("\nS2(1) x S2(2): B block norm", np.linalg.norm(curvature_blocks(rap).Bblock))
