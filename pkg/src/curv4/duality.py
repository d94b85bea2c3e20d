"""Hodge star on bivectors and the self-dual / anti-self-dual block split.

Bivectors are 6-vectors in the ordered basis of an oriented orthonormal frame
``e0^e1, e0^e2, e0^e3, e1^e2, e1^e3, e2^e3``.  The inner product makes that
basis orthonormal, so a simple unit bivector ``X^Y`` has norm 1 and its two
halves each have squared norm 1/2.

Norm convention: ``|W+|`` is the Frobenius norm of the 3x3 block acting on
Lambda+ and ``det W+`` its determinant.  The Frobenius norm of the
(0,4)-tensor ``W_abcd`` is four times larger in square; it is reported
separately as ``tensor_norm_plus_sq`` / ``tensor_norm_minus_sq``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

HODGE = np.zeros((6, 6))
for _src, _dst, _sign in ((0, 5, 1), (1, 4, -1), (2, 3, 1), (3, 2, 1), (4, 1, -1), (5, 0, 1)):
    HODGE[_dst, _src] = _sign

_r = 1.0 / np.sqrt(2.0)
# columns: orthonormal bases of Lambda+ and Lambda-, oriented as in the usual
# (e1^e2 + e3^e4, e1^e3 + e4^e2, e3^e2 + e4^e1)/sqrt2 convention (1-based)
LAMBDA_PLUS = _r * np.array(
    [
        [1, 0, 0, 0, 0, 1],
        [0, 1, 0, 0, -1, 0],
        [0, 0, -1, -1, 0, 0],
    ],
    dtype=float,
).T
LAMBDA_MINUS = _r * np.array(
    [
        [1, 0, 0, 0, 0, -1],
        [0, 1, 0, 0, 1, 0],
        [0, 0, 1, -1, 0, 0],
    ],
    dtype=float,
).T
# orthogonal change of basis: coordinate bivectors -> (Lambda+, Lambda-)
Q = np.hstack([LAMBDA_PLUS, LAMBDA_MINUS])

LEVI_CIVITA = np.zeros((4, 4, 4, 4))
for _p in itertools.permutations(range(4)):
    _m = np.eye(4)[list(_p)]
    LEVI_CIVITA[_p] = round(np.linalg.det(_m))


def hodge_star(alpha):
    """Hodge star of bivector(s) ``alpha`` (trailing dimension 6)."""
    return np.asarray(alpha, dtype=float) @ HODGE.T


def split_bivector(alpha):
    """Return ``(alpha_plus, alpha_minus)`` with ``alpha = alpha_plus + alpha_minus``."""
    alpha = np.asarray(alpha, dtype=float)
    star = hodge_star(alpha)
    return 0.5 * (alpha + star), 0.5 * (alpha - star)


def to_self_dual_coords(alpha):
    """Coordinates of the two halves of ``alpha`` in the Lambda+/Lambda- bases."""
    alpha = np.asarray(alpha, dtype=float)
    return alpha @ LAMBDA_PLUS, alpha @ LAMBDA_MINUS


def from_self_dual_coords(aplus, aminus):
    return np.asarray(aplus) @ LAMBDA_PLUS.T + np.asarray(aminus) @ LAMBDA_MINUS.T


def wedge(X, Y):
    """Bivector X^Y of two frame-component vectors."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return np.stack([X[..., a] * Y[..., b] - X[..., b] * Y[..., a] for a, b in PAIRS], axis=-1)


def plucker(alpha):
    """Plucker quadratic form; zero exactly on simple bivectors."""
    a = np.asarray(alpha, dtype=float)
    return a[..., 0] * a[..., 5] - a[..., 1] * a[..., 4] + a[..., 2] * a[..., 3]


def antisym_matrix(alpha):
    a = np.asarray(alpha, dtype=float)
    M = np.zeros(a.shape[:-1] + (4, 4))
    for k, (i, j) in enumerate(PAIRS):
        M[..., i, j] = a[..., k]
        M[..., j, i] = -a[..., k]
    return M


def plane_of(alpha):
    """Orthonormal pair (X, Y) with X^Y = alpha, for a simple unit bivector."""
    M = antisym_matrix(alpha)
    U, _, _ = np.linalg.svd(M)
    X, Y = U[:, 0], U[:, 1]
    if wedge(X, Y) @ np.asarray(alpha) < 0:
        Y = -Y
    return X, Y


def curvature_operator(R):
    """6x6 matrix of a (0,4) curvature-type tensor acting on bivectors.

    Entry ((ab),(cd)) is R_abcd, so <X^Y, R(X^Y)> = R(X,Y,X,Y).
    """
    R = np.asarray(R)
    out = np.empty(R.shape[:-4] + (6, 6))
    for I, (a, b) in enumerate(PAIRS):
        for J, (c, d) in enumerate(PAIRS):
            out[..., I, J] = R[..., a, b, c, d]
    return out


def tensor_from_operator(op):
    op = np.asarray(op)
    R = np.zeros(op.shape[:-2] + (4, 4, 4, 4))
    for I, (a, b) in enumerate(PAIRS):
        for J, (c, d) in enumerate(PAIRS):
            v = op[..., I, J]
            R[..., a, b, c, d] = v
            R[..., b, a, c, d] = -v
            R[..., a, b, d, c] = -v
            R[..., b, a, d, c] = v
    return R


def self_dual_part(T):
    """Project the first index pair of a frame tensor onto Lambda+: (T + *T)/2."""
    star = 0.5 * np.einsum("abef,...efcd->...abcd", LEVI_CIVITA, T)
    return 0.5 * (T + star)


def anti_self_dual_part(T):
    star = 0.5 * np.einsum("abef,...efcd->...abcd", LEVI_CIVITA, T)
    return 0.5 * (T - star)


@dataclass(frozen=True)
class CurvatureBlocks:
    """``Aplus = W+ + s/12``, ``Aminus = W- + s/12``, ``Bblock: Lambda- -> Lambda+``."""

    Aplus: np.ndarray
    Aminus: np.ndarray
    Bblock: np.ndarray
    s: float

    def operator(self):
        """Reassembled 6x6 operator in the (Lambda+, Lambda-) basis."""
        return np.block([[self.Aplus, self.Bblock], [self.Bblock.T, self.Aminus]])

    def operator_bivector_basis(self):
        return Q @ self.operator() @ Q.T

    @property
    def Wplus(self):
        return self.Aplus - self.s / 12.0 * np.eye(3)

    @property
    def Wminus(self):
        return self.Aminus - self.s / 12.0 * np.eye(3)

    def trace_residuals(self):
        return np.trace(self.Aplus) - self.s / 4.0, np.trace(self.Aminus) - self.s / 4.0


def blocks_from_operator(op6, s):
    """Split a 6x6 bivector-basis operator into Lambda+/- blocks."""
    op6 = np.asarray(op6)
    Ap = LAMBDA_PLUS.T @ op6 @ LAMBDA_PLUS
    Am = LAMBDA_MINUS.T @ op6 @ LAMBDA_MINUS
    Bb = LAMBDA_PLUS.T @ op6 @ LAMBDA_MINUS
    return Ap, Am, Bb


def curvature_blocks(rap) -> CurvatureBlocks:
    """Blocks of the curvature operator of a :class:`RiemannAtPoint`."""
    Ap, Am, Bb = blocks_from_operator(curvature_operator(rap.R), rap.s)
    # symmetrise away rounding; the operator is symmetric by pair exchange
    return CurvatureBlocks(0.5 * (Ap + Ap.T), 0.5 * (Am + Am.T), Bb, float(rap.s))


def synthetic_blocks(rng, scale=1.0):
    """Random algebraic curvature operator in block form."""
    def sym_tf(n=3):
        A = rng.normal(size=(n, n)) * scale
        A = 0.5 * (A + A.T)
        return A - np.trace(A) / n * np.eye(n)

    s = rng.normal() * 12.0 * scale
    return CurvatureBlocks(
        sym_tf() + s / 12.0 * np.eye(3),
        sym_tf() + s / 12.0 * np.eye(3),
        rng.normal(size=(3, 3)) * scale,
        float(s),
    )


def eig_sym3(A):
    """Eigenvalues of symmetric 3x3 matrices, ascending, by the trigonometric formula.

    Works on a single matrix or a stack of shape (..., 3, 3).
    """
    A = np.asarray(A, dtype=float)
    q = np.trace(A, axis1=-2, axis2=-1) / 3.0
    I = np.eye(3)
    D = A - q[..., None, None] * I
    p1 = D[..., 0, 1] ** 2 + D[..., 0, 2] ** 2 + D[..., 1, 2] ** 2
    p2 = D[..., 0, 0] ** 2 + D[..., 1, 1] ** 2 + D[..., 2, 2] ** 2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    safe = np.where(p > 0, p, 1.0)
    B = D / safe[..., None, None]
    r = np.clip(np.linalg.det(B) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = 3.0 * q - hi - lo
    w = np.stack([lo, mid, hi], axis=-1)
    return np.sort(w, axis=-1)


@dataclass(frozen=True)
class WeylSpectrum:
    wplus: np.ndarray
    wminus: np.ndarray
    norm_plus_sq: float
    norm_minus_sq: float
    det_plus: float
    det_minus: float
    trace_plus: float
    trace_minus: float

    @property
    def tensor_norm_plus_sq(self):
        """Squared Frobenius norm of the (0,4)-tensor W+_abcd."""
        return 4.0 * self.norm_plus_sq

    @property
    def tensor_norm_minus_sq(self):
        return 4.0 * self.norm_minus_sq


def spectrum_from_matrices(Wp, Wm) -> WeylSpectrum:
    wp = eig_sym3(Wp)
    wm = eig_sym3(Wm)
    return WeylSpectrum(
        wp,
        wm,
        float(np.sum(wp**2)),
        float(np.sum(wm**2)),
        float(np.prod(wp)),
        float(np.prod(wm)),
        float(np.sum(wp)),
        float(np.sum(wm)),
    )


def weyl_spectrum(cb: CurvatureBlocks) -> WeylSpectrum:
    return spectrum_from_matrices(cb.Wplus, cb.Wminus)
