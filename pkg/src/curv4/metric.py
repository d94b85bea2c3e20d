"""Metric fields on a single four-dimensional chart."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import InputError, NonSPDMetricError
from .expr import DEFAULT_COORDS, BinOp, Expr, Num, eval_jet2, parse, unparse


@dataclass(frozen=True)
class MetricField:
    """Ten expression-defined components ``g_ij`` (i <= j) on a coordinate box.

    ``known`` holds optional metadata such as ``einstein``, ``scalar`` and
    ``lambda1``; it is never trusted without a numerical check.
    """

    components: Mapping[tuple, Expr]
    domain: np.ndarray
    params: Mapping[str, float] = field(default_factory=dict)
    coords: Sequence[str] = DEFAULT_COORDS
    name: str = "metric"
    known: Mapping[str, object] = field(default_factory=dict)

    @classmethod
    def from_strings(cls, entries, domain, params=None, coords=DEFAULT_COORDS, name="metric", known=None):
        """Build from ``{"g00": "...", "g01": "..."}``; missing entries are zero."""
        params = dict(params or {})
        comps = {}
        for key, src in entries.items():
            if len(key) != 3 or key[0] != "g" or not key[1:].isdigit():
                raise InputError(f"bad metric key {key!r}")
            i, j = sorted((int(key[1]), int(key[2])))
            if j > 3:
                raise InputError(f"bad metric key {key!r}")
            if (i, j) in comps:
                raise InputError(f"duplicate metric entry for g{i}{j}")
            comps[(i, j)] = parse(str(src), coords, list(params))
        for i in range(4):
            for j in range(i, 4):
                comps.setdefault((i, j), Num(0.0))
        dom = np.asarray(domain, dtype=float)
        if dom.shape != (4, 2) or np.any(~np.isfinite(dom)) or np.any(dom[:, 0] >= dom[:, 1]):
            raise InputError("domain must be four finite intervals [lo, hi] with lo < hi")
        return cls(comps, dom, params, tuple(coords), name, dict(known or {}))

    def to_strings(self):
        return {f"g{i}{j}": unparse(e) for (i, j), e in sorted(self.components.items())}

    def with_params(self, **params):
        p = dict(self.params)
        p.update(params)
        return MetricField(self.components, self.domain, p, self.coords, self.name, self.known)

    def scaled(self, c):
        """The metric ``c * g`` (same chart)."""
        comps = {k: BinOp("*", Num(float(c)), e) for k, e in self.components.items()}
        return MetricField(comps, self.domain, self.params, self.coords, self.name, {})

    def contains(self, X, margin=0.0):
        X = np.asarray(X, dtype=float)
        lo = self.domain[:, 0] + margin
        hi = self.domain[:, 1] - margin
        return np.all((X >= lo) & (X <= hi), axis=-1)

    def jets(self, X):
        """Metric values and derivatives at points X (shape B + (4,)).

        Returns ``g[..., i, j]``, ``dg[..., i, j, k] = d_k g_ij`` and
        ``ddg[..., i, j, k, l] = d_k d_l g_ij``.
        """
        X = np.asarray(X, dtype=float)
        B = X.shape[:-1]
        g = np.empty(B + (4, 4))
        dg = np.empty(B + (4, 4, 4))
        ddg = np.empty(B + (4, 4, 4, 4))
        for (i, j), e in self.components.items():
            jet = eval_jet2(e, X, self.params)
            for a, b in ((i, j), (j, i)):
                g[..., a, b] = jet.value
                dg[..., a, b, :] = jet.grad
                ddg[..., a, b, :, :] = jet.hess
        return g, dg, ddg

    def values(self, X):
        return self.jets(X)[0]

    def interior_points(self, n, margin_frac=0.0):
        """Cell-centred lexicographic grid with ``n`` points per axis."""
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        w = hi - lo
        lo = lo + margin_frac * w
        w = w * (1 - 2 * margin_frac)
        axes = [lo[k] + (np.arange(n) + 0.5) * w[k] / n for k in range(4)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def halton_points(self, n, margin_frac=0.05):
        """``n`` deterministic low-discrepancy points inside the domain."""
        sampler = qmc.Halton(d=4, scramble=False)
        u = sampler.random(n + 1)[1:]
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        w = hi - lo
        return lo + margin_frac * w + u * w * (1 - 2 * margin_frac)

    def spd_mask(self, X):
        ev = np.linalg.eigvalsh(self.values(X))
        return np.all(ev > 0, axis=-1) & np.all(np.isfinite(ev), axis=-1)

    def check_spd(self, X):
        X = np.asarray(X, dtype=float)
        ok = self.spd_mask(X)
        if not np.all(ok):
            bad = np.argwhere(~np.atleast_1d(ok)).ravel().tolist()
            raise NonSPDMetricError(f"metric {self.name!r} is not positive definite at sample(s) {bad}")
