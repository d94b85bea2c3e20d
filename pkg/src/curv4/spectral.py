"""Brackets for the first positive eigenvalue of the Laplacian.

Upper bound: Rayleigh-Ritz on a catalog entry's trial functions, with
product Gauss-Legendre quadrature over the entry's spectral chart.  Every
trial combination orthogonal to constants gives an upper bound for lambda1,
so the smallest generalized eigenvalue of the (stiffness, mass) pair restricted
to mean-zero functions is one as well, up to quadrature error.

Lower bound: the Lichnerowicz estimate 4 rho / 3 from a sampled Ricci minimum,
or the exact value when the entry carries a verified one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .catalog import CatalogEntry
from .errors import InputError, NonCompactError, NumericError
from .expr import eval_jet2
from .geometry import curvature_field
from .metric import MetricField

DEFAULT_NODES = (12, 16)
CHUNK = 8192
NULL_REL = 1e-9  # mass-matrix directions below this are dropped as dependent
QUAD_REL_TOL = 1e-3


class QuadratureError(NumericError):
    pass


@dataclass(frozen=True)
class Lambda1Estimate:
    lower: float
    upper: float
    lower_source: str
    upper_source: str
    exact: Optional[float]
    rho: float
    upper_error: float
    volume: float
    volume_error: float
    trial_count: int

    @property
    def bracket(self):
        return (self.lower, self.upper)


@dataclass(frozen=True)
class RayleighRitz:
    value: float
    volume: float
    nodes: int


def gauss_legendre_grid(domain, n):
    """Tensor-product Gauss-Legendre nodes and weights on a 4D box."""
    x, w = np.polynomial.legendre.leggauss(n)
    axes, weights = [], []
    for lo, hi in domain:
        half = 0.5 * (hi - lo)
        axes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    mesh = np.meshgrid(*axes, indexing="ij")
    wmesh = np.meshgrid(*weights, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    wts = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    return pts, wts


def rayleigh_ritz(m: MetricField, trial, n) -> RayleighRitz:
    """Smallest Ritz value of mean-zero combinations of ``trial`` on ``m``."""
    pts, wts = gauss_legendre_grid(m.domain, n)
    k = len(trial)
    M = np.zeros((k, k))
    K = np.zeros((k, k))
    mean = np.zeros(k)
    vol = 0.0
    for start in range(0, len(pts), CHUNK):
        X = pts[start : start + CHUNK]
        g = m.values(X)
        dV = wts[start : start + CHUNK] * np.sqrt(np.clip(np.linalg.det(g), 0.0, None))
        ginv = np.linalg.inv(g)
        jets = [eval_jet2(f, X, m.params) for f in trial]
        F = np.stack([j.value for j in jets], axis=-1)
        G = np.stack([j.grad for j in jets], axis=-2)
        M += np.einsum("n,nk,nl->kl", dV, F, F)
        K += np.einsum("n,nij,nki,nlj->kl", dV, ginv, G, G)
        mean += dV @ F
        vol += dV.sum()
    M -= np.outer(mean, mean) / vol
    ev, U = np.linalg.eigh(0.5 * (M + M.T))
    keep = ev > NULL_REL * ev.max()
    if not np.any(keep):
        raise InputError("trial functions are all constant")
    T = U[:, keep] / np.sqrt(ev[keep])
    lam = np.linalg.eigvalsh(T.T @ (0.5 * (K + K.T)) @ T)
    return RayleighRitz(float(lam[0]), float(vol), n)


def sample_rho(m: MetricField, n=64):
    """Smallest Ricci eigenvalue over ``n`` Halton points of the chart."""
    cf = curvature_field(m, m.halton_points(n))
    return float(np.min(np.linalg.eigvalsh(cf.Ric)))


def lichnerowicz_bound(rho):
    return 4.0 * rho / 3.0 if rho > 0 else 0.0


def lambda1_estimate(entry: CatalogEntry, trial_budget=None, nodes=DEFAULT_NODES, rho_samples=64) -> Lambda1Estimate:
    if not entry.compact or entry.spectral is None:
        raise NonCompactError(f"{entry.name}: lambda1 is only estimated for compact catalog models")
    trial = entry.trial if trial_budget is None else entry.trial[: int(trial_budget)]
    if not trial:
        raise InputError("trial budget must be positive")
    coarse, fine = (rayleigh_ritz(entry.spectral, trial, n) for n in nodes)
    upper_err = abs(fine.value - coarse.value)
    vol_err = abs(fine.volume - coarse.volume)
    if not np.isfinite(fine.value) or upper_err > QUAD_REL_TOL * max(1.0, abs(fine.value)):
        raise QuadratureError(
            f"{entry.name}: Rayleigh quotient not converged ({coarse.value} vs {fine.value})"
        )
    rho = sample_rho(entry.metric, rho_samples)
    lower, lower_source = lichnerowicz_bound(rho), "lichnerowicz"
    exact = entry.known.get("lambda1")
    if exact is not None and exact >= lower:
        lower, lower_source = float(exact), "exact"
    return Lambda1Estimate(
        lower=float(lower),
        upper=fine.value,
        lower_source=lower_source,
        upper_source="rayleigh-ritz",
        exact=None if exact is None else float(exact),
        rho=rho,
        upper_error=upper_err,
        volume=fine.volume,
        volume_error=vol_err,
        trial_count=len(trial),
    )
