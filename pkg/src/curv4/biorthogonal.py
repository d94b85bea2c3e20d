"""Sectional and biorthogonal curvature, and the minimum K1perp.

A 2-plane with orthonormal basis (X, Y) is the simple unit bivector
``alpha = X^Y``; its halves ``alpha+``, ``alpha-`` each have squared norm 1/2,
and every such pair of halves comes from exactly one oriented plane.  Writing
``alpha+ = u/sqrt2`` and ``alpha- = v/sqrt2`` with unit 3-vectors u, v in the
Lambda+/Lambda- bases::

    K(P)      = (u.A+u)/2 + (v.A-v)/2 + u.Bv
    Kperp(P)  = (u.A+u)/2 + (v.A-v)/2

so the minimum of Kperp is attained separately on each sphere and equals
``(w1+ + w1-)/2 + s/12``.  The brute-force route below minimises over the
product of the two spheres anyway and serves as a cross-check of that closed
form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import duality
from .duality import CurvatureBlocks, WeylSpectrum
from .errors import InputError

ORTHO_TOL = 1e-10


class NonOrthonormalError(InputError):
    pass


@dataclass(frozen=True)
class TwoPlane:
    X: np.ndarray
    Y: np.ndarray
    alpha: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray

    @classmethod
    def from_vectors(cls, X, Y, tol=ORTHO_TOL):
        """Plane spanned by frame-component vectors X, Y (must be orthonormal)."""
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        gram = np.array([[X @ X, X @ Y], [Y @ X, Y @ Y]])
        if np.max(np.abs(gram - np.eye(2))) > tol:
            raise NonOrthonormalError(f"X, Y are not orthonormal (Gram matrix {gram.tolist()})")
        alpha = duality.wedge(X, Y)
        ap, am = duality.split_bivector(alpha)
        return cls(X, Y, alpha, ap, am)

    @classmethod
    def from_halves(cls, u, v):
        """Plane whose bivector halves are u/sqrt2 and v/sqrt2 (u, v unit 3-vectors)."""
        u = np.asarray(u, dtype=float) / np.linalg.norm(u)
        v = np.asarray(v, dtype=float) / np.linalg.norm(v)
        alpha = duality.from_self_dual_coords(u, v) / np.sqrt(2.0)
        X, Y = duality.plane_of(alpha)
        return cls.from_vectors(X, Y, tol=1e-8)

    @classmethod
    def random(cls, rng):
        Q, _ = np.linalg.qr(rng.normal(size=(4, 2)))
        return cls.from_vectors(Q[:, 0], Q[:, 1])

    def orthogonal(self):
        """The orthogonal plane, whose bivector is alpha+ - alpha-."""
        X, Y = duality.plane_of(self.alpha_plus - self.alpha_minus)
        return TwoPlane.from_vectors(X, Y, tol=1e-8)

    def halves(self):
        """Unit 3-vectors (u, v) with alpha+- = u/sqrt2, v/sqrt2 in the Lambda+- bases."""
        u, v = duality.to_self_dual_coords(self.alpha)
        return u * np.sqrt(2.0), v * np.sqrt(2.0)


def sectional(rap, P: TwoPlane) -> float:
    """K(P) = R(X, Y, X, Y) by direct contraction."""
    return float(np.einsum("abcd,a,b,c,d->", rap.R, P.X, P.Y, P.X, P.Y))


def sectional_dual(cb: CurvatureBlocks, P: TwoPlane) -> float:
    """K(P) = s/12 + <a+, W+ a+> + <a-, W- a-> + 2 <a+, B a->."""
    ap = duality.to_self_dual_coords(P.alpha_plus)[0]
    am = duality.to_self_dual_coords(P.alpha_minus)[1]
    return float(cb.s / 12.0 + ap @ cb.Wplus @ ap + am @ cb.Wminus @ am + 2.0 * ap @ cb.Bblock @ am)


def biorthogonal_curvature(rap, P: TwoPlane) -> float:
    """Kperp(P) = (K(P) + K(P^perp)) / 2."""
    return 0.5 * (sectional(rap, P) + sectional(rap, P.orthogonal()))


def biorthogonal_dual(cb: CurvatureBlocks, P: TwoPlane) -> float:
    ap = duality.to_self_dual_coords(P.alpha_plus)[0]
    am = duality.to_self_dual_coords(P.alpha_minus)[1]
    return float(cb.s / 12.0 + ap @ cb.Wplus @ ap + am @ cb.Wminus @ am)


def k1perp_closed(ws: WeylSpectrum, s: float) -> float:
    return float((ws.wplus[0] + ws.wminus[0]) / 2.0 + s / 12.0)


def _sphere_grid(n):
    th = (np.arange(n) + 0.5) * np.pi / n
    ph = np.arange(n) * 2 * np.pi / n
    T, P = np.meshgrid(th, ph, indexing="ij")
    T, P = T.ravel(), P.ravel()
    return np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)


def _tangent_basis(u):
    a = np.eye(3)[np.argmin(np.abs(u))]
    t1 = np.cross(u, a)
    t1 /= np.linalg.norm(t1)
    return t1, np.cross(u, t1)


@dataclass(frozen=True)
class BiorthogonalResult:
    K1perp_closed: float
    K1perp_bruteforce: float
    argmin_plane: TwoPlane
    sectional_min: float
    sectional_argmin: TwoPlane
    method: dict = field(default_factory=dict)


def _refine(f, u0, v0, step, maxiter, tol):
    t = _tangent_basis(u0) + _tangent_basis(v0)

    def point(w):
        u = u0 + w[0] * t[0] + w[1] * t[1]
        v = v0 + w[2] * t[2] + w[3] * t[3]
        return u / np.linalg.norm(u), v / np.linalg.norm(v)

    def obj(w):
        return f(*point(w))

    simplex = np.vstack([np.zeros(4), step * np.eye(4)])
    res = minimize(
        obj,
        np.zeros(4),
        method="Nelder-Mead",
        options=dict(maxiter=maxiter, xatol=tol, fatol=tol, initial_simplex=simplex),
    )
    spread = float(np.ptp(res.final_simplex[1]))
    return res.fun, point(res.x), res.nit, spread


def minimize_over_planes(cb: CurvatureBlocks, grid=16, maxiter=200, tol=1e-10, include_b=False):
    """Grid search over S^2 x S^2 followed by downhill-simplex refinement.

    Minimises Kperp (``include_b=False``) or the sectional curvature K.
    Returns ``(value, (u, v), info)``; ties on the grid go to the smallest
    lexicographic grid index.
    """
    if grid < 16:
        raise InputError("grid resolution must be at least 16")
    S = _sphere_grid(grid)
    Ap, Am, B = cb.Aplus, cb.Aminus, cb.Bblock
    qa = 0.5 * np.einsum("ni,ij,nj->n", S, Ap, S)
    qb = 0.5 * np.einsum("ni,ij,nj->n", S, Am, S)
    total = qa[:, None] + qb[None, :]
    if include_b:
        total = total + S @ B @ S.T
    k = int(np.argmin(total))
    i, j = divmod(k, len(S))
    grid_val = float(total.flat[k])

    if include_b:
        def f(u, v):
            return 0.5 * u @ Ap @ u + 0.5 * v @ Am @ v + u @ B @ v
    else:
        def f(u, v):
            return 0.5 * u @ Ap @ u + 0.5 * v @ Am @ v

    val, (u, v), nit, spread = _refine(f, S[i], S[j], np.pi / grid, maxiter, tol)
    if grid_val < val:
        val, u, v = grid_val, S[i], S[j]
    info = dict(grid=grid, grid_value=grid_val, iterations=int(nit), simplex_spread=spread)
    return float(val), (u, v), info


def k1perp_bruteforce(rap_or_blocks, grid=16, maxiter=200, tol=1e-10) -> BiorthogonalResult:
    cb = rap_or_blocks if isinstance(rap_or_blocks, CurvatureBlocks) else duality.curvature_blocks(rap_or_blocks)
    kp, (u, v), info = minimize_over_planes(cb, grid, maxiter, tol, include_b=False)
    ks, (us, vs), info_s = minimize_over_planes(cb, grid, maxiter, tol, include_b=True)
    closed = k1perp_closed(duality.weyl_spectrum(cb), cb.s)
    info = dict(info)
    info["sectional"] = info_s
    info["estimated_error"] = max(info["simplex_spread"], abs(kp - closed))
    return BiorthogonalResult(
        K1perp_closed=closed,
        K1perp_bruteforce=kp,
        argmin_plane=TwoPlane.from_halves(u, v),
        sectional_min=ks,
        sectional_argmin=TwoPlane.from_halves(us, vs),
        method=info,
    )


def max_sectional_gap(cb: CurvatureBlocks, planes):
    """max over the given planes of |K(P) - Kperp(P)| = |2 <a+, B a->|."""
    return max(abs(sectional_dual(cb, P) - biorthogonal_dual(cb, P)) for P in planes)


def max_sectional_gap_exact(cb: CurvatureBlocks) -> float:
    """Supremum over all planes of |K - Kperp|: the largest singular value of B."""
    return float(np.linalg.svd(cb.Bblock, compute_uv=False)[0])
