"""Curvature of a metric field on a chart.

Everything up to the Riemann tensor is exact in the sense of the jets: the
metric's first and second derivatives come from :mod:`curv4.jets`.  Quantities
that need a third derivative of the metric (``nabla W``, ``delta W``,
``Laplacian |W+-|^2``) are central differences of exactly computed pointwise
fields, with one Richardson level and an error estimate.

Sign conventions: ``R_abab`` is the sectional curvature of the plane
``e_a ^ e_b`` (so the unit sphere has ``R_abcd = d_ac d_bd - d_ad d_bc``), and
the Laplacian is the trace of the Hessian (non-positive spectrum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import duality
from .errors import BoundaryMarginError, NonSPDMetricError
from .expr import Expr, eval_jet2
from .metric import MetricField

FD_REL_STEP = 1e-3


def _ein(spec, *ops):
    return np.einsum(spec, *ops, optimize=True)


def christoffel_from_jets(g, dg):
    """``G[..., k, i, j] = Gamma^k_ij`` and ``Gl[..., l, i, j] = Gamma_{l,ij}``."""
    ginv = np.linalg.inv(g)
    # Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    Gl = 0.5 * (
        _ein("...jli->...lij", dg) + _ein("...ilj->...lij", dg) - _ein("...ijl->...lij", dg)
    )
    G = _ein("...kl,...lij->...kij", ginv, Gl)
    return ginv, G, Gl


def orthonormal_frame(g, seed=None):
    """Gram-Schmidt frame(s) for metric(s) ``g``; columns are frame vectors.

    With ``seed`` (a 4x4 matrix whose columns are the starting vectors) the
    result spans the same flags as the seed.  The frame is made positively
    oriented by swapping the last two vectors when needed.
    """
    g = np.asarray(g, dtype=float)
    S = np.eye(4) if seed is None else np.asarray(seed, dtype=float)
    gs = np.swapaxes(S, -1, -2) @ g @ S
    try:
        L = np.linalg.cholesky(gs)
    except np.linalg.LinAlgError as exc:
        raise NonSPDMetricError("metric is not positive definite") from exc
    Linv_T = np.swapaxes(np.linalg.inv(L), -1, -2)
    e = S @ Linv_T
    flip = np.linalg.det(e) < 0
    if np.any(flip):
        e = np.array(e, copy=True)
        e[flip, :, 2], e[flip, :, 3] = e[flip, :, 3].copy(), e[flip, :, 2].copy()
    return e


def to_frame(T, e):
    """Frame components of a covariant tensor with coordinate components T."""
    nidx = T.ndim - (e.ndim - 2)
    letters = "abcdefgh"[:nidx]
    coord = "ijklmnop"[:nidx]
    spec = ",".join(f"...{c}{a}" for c, a in zip(coord, letters))
    return _ein(f"{spec},...{coord}->...{letters}", *([e] * nidx), T)


def weyl_from_riemann(R, Ric, s, g):
    """Weyl tensor via the four-dimensional Ricci decomposition."""
    gg = _ein("...ik,...jl->...ijkl", g, g)
    gg = gg - np.swapaxes(gg, -1, -2)
    P = (
        _ein("...ik,...jl->...ijkl", g, Ric)
        - _ein("...il,...jk->...ijkl", g, Ric)
        - _ein("...jk,...il->...ijkl", g, Ric)
        + _ein("...jl,...ik->...ijkl", g, Ric)
    )
    return R - 0.5 * P + (np.asarray(s)[..., None, None, None, None] / 6.0) * gg


@dataclass(frozen=True)
class CurvatureField:
    """Curvature data at a batch of points (leading axis = point index)."""

    X: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray
    R_coord: np.ndarray
    Ric_coord: np.ndarray
    s: np.ndarray
    W_coord: np.ndarray
    frame: np.ndarray
    R: np.ndarray
    Ric: np.ndarray
    W: np.ndarray
    B: np.ndarray

    def __len__(self):
        return len(self.X)

    def at(self, k) -> "RiemannAtPoint":
        return RiemannAtPoint(
            point=self.X[k],
            g=self.g[k],
            frame=self.frame[k],
            christoffel=self.gamma[k],
            R=self.R[k],
            Ric=self.Ric[k],
            s=float(self.s[k]),
            W=self.W[k],
            B_tensor=self.B[k],
            R_coord=self.R_coord[k],
            W_coord=self.W_coord[k],
        )


def curvature_field(m: MetricField, X, seed=None) -> CurvatureField:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    g, dg, ddg = m.jets(X)
    ev = np.linalg.eigvalsh(g)
    bad = ~(np.all(ev > 0, axis=-1) & np.all(np.isfinite(ev), axis=-1))
    if np.any(bad):
        raise NonSPDMetricError(
            f"metric {m.name!r} is not positive definite at {X[bad][0].tolist()}"
        )
    ginv, G, Gl = christoffel_from_jets(g, dg)
    # R_abcd = 1/2 (d_b d_c g_ad + d_a d_d g_bc - d_b d_d g_ac - d_a d_c g_bd)
    #          + Gamma^e_bc Gamma_{e,ad} - Gamma^e_bd Gamma_{e,ac}
    R = 0.5 * (
        _ein("...adbc->...abcd", ddg)
        + _ein("...bcad->...abcd", ddg)
        - _ein("...acbd->...abcd", ddg)
        - _ein("...bdac->...abcd", ddg)
    )
    R = R + _ein("...ebc,...ead->...abcd", G, Gl) - _ein("...ebd,...eac->...abcd", G, Gl)
    Ric = _ein("...ac,...abcd->...bd", ginv, R)
    Ric = 0.5 * (Ric + np.swapaxes(Ric, -1, -2))
    s = _ein("...bd,...bd->...", ginv, Ric)
    W = weyl_from_riemann(R, Ric, s, g)
    e = orthonormal_frame(g, seed)
    Rf = to_frame(R, e)
    Ricf = to_frame(Ric, e)
    Wf = to_frame(W, e)
    Bf = Ricf - (s / 4.0)[..., None, None] * np.eye(4)
    return CurvatureField(X, g, ginv, dg, G, R, Ric, s, W, e, Rf, Ricf, Wf, Bf)


@dataclass(frozen=True)
class RiemannAtPoint:
    """Curvature at one point; tensor fields are in the orthonormal ``frame``."""

    point: np.ndarray
    g: np.ndarray
    frame: np.ndarray
    christoffel: np.ndarray
    R: np.ndarray
    Ric: np.ndarray
    s: float
    W: np.ndarray
    B_tensor: np.ndarray
    R_coord: np.ndarray = None
    W_coord: np.ndarray = None

    def bianchi_residual(self):
        R = self.R
        return float(np.max(np.abs(R + np.einsum("abcd->acdb", R) + np.einsum("abcd->adbc", R))))

    def symmetry_residual(self):
        R = self.R
        return float(
            max(
                np.max(np.abs(R + np.swapaxes(R, 0, 1))),
                np.max(np.abs(R + np.swapaxes(R, 2, 3))),
                np.max(np.abs(R - np.einsum("abcd->cdab", R))),
            )
        )

    def weyl_trace_residual(self):
        W = self.W
        return float(
            max(
                np.max(np.abs(np.einsum("aacd->cd", W))),
                np.max(np.abs(np.einsum("abad->bd", W))),
                np.max(np.abs(np.einsum("abca->bc", W))),
            )
        )

    def einstein_residual(self):
        """Frobenius norm of the traceless Ricci tensor."""
        return float(np.linalg.norm(self.B_tensor))

    def ricci_eigenvalues(self):
        return np.linalg.eigvalsh(self.Ric)


def curvature_at(m: MetricField, p, seed=None) -> RiemannAtPoint:
    return curvature_field(m, np.asarray(p, dtype=float)[None, :], seed).at(0)


def christoffel(m: MetricField, p):
    """``Gamma^k_ij`` at ``p`` as an array indexed [k, i, j]."""
    g, dg, _ = m.jets(np.asarray(p, dtype=float))
    m.check_spd(np.asarray(p, dtype=float)[None])
    return christoffel_from_jets(g, dg)[1]


def fd_steps(p, h=None):
    p = np.asarray(p, dtype=float)
    if h is None:
        return FD_REL_STEP * np.maximum(1.0, np.abs(p))
    return np.broadcast_to(np.asarray(h, dtype=float), (4,)).copy()


def _check_margin(m, p, h):
    if not (m.contains(p - 2 * h) and m.contains(p + 2 * h)):
        raise BoundaryMarginError(
            f"point {p.tolist()} is closer than 2h to the boundary of the chart domain"
        )


def nabla_g_residual(m: MetricField, p, h=None):
    """Max |nabla_k g_ij| with d_k g_ij from central differences of g."""
    p = np.asarray(p, dtype=float)
    h = fd_steps(p, h)
    _check_margin(m, p, h)

    def D(step):
        pts = []
        for k in range(4):
            d = np.zeros(4)
            d[k] = step[k]
            pts += [p + d, p - d]
        gv = m.values(np.array(pts))
        return np.stack([(gv[2 * k] - gv[2 * k + 1]) / (2 * step[k]) for k in range(4)], axis=-1)

    dg = (4 * D(h / 2) - D(h)) / 3
    G = christoffel(m, p)
    g = m.values(p)
    # nabla_k g_ij = d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il
    res = dg - np.einsum("lki,lj->ijk", G, g) - np.einsum("lkj,il->ijk", G, g)
    return float(np.max(np.abs(res)))


def laplace_beltrami(m: MetricField, f: Expr, p, params=None) -> float:
    """``g^ij (d_i d_j f - Gamma^k_ij d_k f)`` with exact jets of f and g."""
    p = np.asarray(p, dtype=float)
    fp = dict(m.params)
    fp.update(params or {})
    jet = eval_jet2(f, p, fp)
    g, dg, _ = m.jets(p)
    ginv, G, _ = christoffel_from_jets(g, dg)
    return float(np.einsum("ij,ij->", ginv, jet.hess - np.einsum("kij,k->ij", G, jet.grad)))


def op_norm_sq(T, axes=4):
    """Squared norm in the bivector-operator convention: (1/4) sum of squares."""
    return 0.25 * np.sum(np.asarray(T) ** 2, axis=tuple(range(-axes, 0)))


@dataclass(frozen=True)
class WeylDerivative:
    """Covariant derivative of W at one point, frame components ``[e, a, b, c, d]``.

    Norms use the operator convention of :mod:`curv4.duality`.
    """

    nabla_W: np.ndarray
    nabla_Wplus: np.ndarray
    nabla_Wminus: np.ndarray
    W_sq: float
    Wplus_sq: float
    Wminus_sq: float
    grad_W_sq: float
    grad_Wplus_sq: float
    grad_Wminus_sq: float
    grad_abs_W_sq: float
    grad_abs_Wplus_sq: float
    grad_abs_Wminus_sq: float
    error: float

    @property
    def div(self):
        return -np.einsum("aabcd->bcd", self.nabla_W)

    @property
    def div_plus(self):
        return -np.einsum("aabcd->bcd", self.nabla_Wplus)

    @property
    def div_minus(self):
        return -np.einsum("aabcd->bcd", self.nabla_Wminus)


def grad_abs_sq(T, nablaT):
    """Squared norm of the gradient of |T| (zero where T vanishes)."""
    # d|T|^2 = 2 <T, nabla T>, and |d|T|| = |d|T|^2| / (2|T|)
    nsq = op_norm_sq(T)
    dnsq = 2 * 0.25 * np.einsum("...abcd,...eabcd->...e", T, nablaT)
    safe = np.where(nsq > 0, nsq, 1.0)
    return np.where(nsq > 0, np.sum(dnsq**2, axis=-1) / (4 * safe), 0.0)


def fd_margin_mask(m: MetricField, P, h=None):
    """Rows of P far enough from the chart boundary for the FD stencils."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    H = FD_REL_STEP * np.maximum(1.0, np.abs(P)) if h is None else np.broadcast_to(h, P.shape)
    return m.contains(P - 2 * H) & m.contains(P + 2 * H)


@dataclass(frozen=True)
class WeylDerivativeField:
    """Frame components of W and nabla W at a batch of points."""

    W: np.ndarray
    nabla_W: np.ndarray
    error: np.ndarray
    centers: CurvatureField


def weyl_derivative_field(m: MetricField, P, h=None) -> WeylDerivativeField:
    """nabla W by central differences of the coordinate W plus the connection terms.

    One curvature evaluation covers the whole 17-point stencil of every row.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    N = len(P)
    H = FD_REL_STEP * np.maximum(1.0, np.abs(P)) if h is None else np.broadcast_to(h, P.shape).astype(float)
    bad = ~fd_margin_mask(m, P, H)
    if np.any(bad):
        raise BoundaryMarginError(
            f"point {P[bad][0].tolist()} is closer than 2h to the boundary of the chart domain"
        )
    offs = np.zeros((N, 17, 4))
    j = 1
    for level in (1.0, 0.5):
        for k in range(4):
            offs[:, j, k] = level * H[:, k]
            offs[:, j + 1, k] = -level * H[:, k]
            j += 2
    cf = curvature_field(m, (P[:, None, :] + offs).reshape(-1, 4))
    Wc = cf.W_coord.reshape(N, 17, 4, 4, 4, 4)

    def D(first, step):
        return np.stack(
            [(Wc[:, first + 2 * k] - Wc[:, first + 2 * k + 1]) / (2 * step[:, k, None, None, None, None]) for k in range(4)],
            axis=1,
        )

    Dh, Dh2 = D(1, H), D(9, H / 2)
    dW = (4 * Dh2 - Dh) / 3
    err_coord = np.abs(Dh2 - Dh) / 3
    G = cf.gamma.reshape(N, 17, 4, 4, 4)[:, 0]
    W0 = Wc[:, 0]
    nab = (
        dW
        - np.einsum("...nmi,...njkl->...mijkl", G, W0)
        - np.einsum("...nmj,...inkl->...mijkl", G, W0)
        - np.einsum("...nmk,...ijnl->...mijkl", G, W0)
        - np.einsum("...nml,...ijkn->...mijkl", G, W0)
    )
    centre = curvature_field(m, P)
    e = centre.frame
    err = np.sqrt(op_norm_sq(to_frame(err_coord, np.abs(e)), 5))
    return WeylDerivativeField(centre.W, to_frame(nab, e), err, centre)


def covariant_derivative_W(m: MetricField, p, h=None) -> WeylDerivative:
    p = np.asarray(p, dtype=float)
    fld = weyl_derivative_field(m, p[None, :], None if h is None else fd_steps(p, h))
    Wf, nab_f = fld.W[0], fld.nabla_W[0]
    Wp = duality.self_dual_part(Wf)
    Wm = duality.anti_self_dual_part(Wf)
    nWp = duality.self_dual_part(nab_f)
    nWm = duality.anti_self_dual_part(nab_f)
    return WeylDerivative(
        nabla_W=nab_f,
        nabla_Wplus=nWp,
        nabla_Wminus=nWm,
        W_sq=float(op_norm_sq(Wf)),
        Wplus_sq=float(op_norm_sq(Wp)),
        Wminus_sq=float(op_norm_sq(Wm)),
        grad_W_sq=float(op_norm_sq(nab_f, 5)),
        grad_Wplus_sq=float(op_norm_sq(nWp, 5)),
        grad_Wminus_sq=float(op_norm_sq(nWm, 5)),
        grad_abs_W_sq=float(grad_abs_sq(Wf, nab_f)),
        grad_abs_Wplus_sq=float(grad_abs_sq(Wp, nWp)),
        grad_abs_Wminus_sq=float(grad_abs_sq(Wm, nWm)),
        error=float(fld.error[0]),
    )


@dataclass(frozen=True)
class WeylDivergence:
    delta_W: np.ndarray
    norm_sq: float
    norm_plus_sq: float
    norm_minus_sq: float
    error: float

    @property
    def norm(self):
        return float(np.sqrt(self.norm_sq))


def _div_norm_sq(T):
    # each antisymmetric index pair counted once
    return float(0.5 * np.sum(T**2))


def div_weyl(m: MetricField, p, h=None) -> WeylDivergence:
    """Formal divergence ``(delta W)_bcd = -nabla^a W_abcd`` and its halves."""
    wd = covariant_derivative_W(m, p, h)
    return WeylDivergence(
        wd.div,
        _div_norm_sq(wd.div),
        _div_norm_sq(wd.div_plus),
        _div_norm_sq(wd.div_minus),
        wd.error,
    )


def div_weyl_norms(m: MetricField, P, h=None):
    """|delta W|, |delta W+|, |delta W-| and FD error at a batch of points."""
    fld = weyl_derivative_field(m, P, h)
    nab = fld.nabla_W
    parts = (nab, duality.self_dual_part(nab), duality.anti_self_dual_part(nab))
    norms = [np.sqrt(0.5 * np.sum(np.einsum("...aabcd->...bcd", T) ** 2, axis=(-1, -2, -3))) for T in parts]
    return norms[0], norms[1], norms[2], fld.error


def laplacian_fd(m: MetricField, F, p, h=None):
    """Laplace-Beltrami of scalar field(s) ``F`` known only pointwise.

    ``F`` maps a batch of points (N, 4) to values of shape (N,) or (N, k).
    Second derivatives come from the 4D central-difference stencil with one
    Richardson level.  Returns ``(value, error_estimate)``.
    """
    p = np.asarray(p, dtype=float)
    h = fd_steps(p, h)
    _check_margin(m, p, h)

    def stencil(step):
        pts = [p]
        for i in range(4):
            d = np.zeros(4)
            d[i] = step[i]
            pts += [p + d, p - d]
        for i in range(4):
            for j in range(i + 1, 4):
                di = np.zeros(4)
                dj = np.zeros(4)
                di[i] = step[i]
                dj[j] = step[j]
                pts += [p + di + dj, p + di - dj, p - di + dj, p - di - dj]
        return pts

    pts = stencil(h) + stencil(h / 2)
    vals = np.asarray(F(np.array(pts)), dtype=float)
    n = len(pts) // 2

    def derivs(v, step):
        f0 = v[0]
        grad = np.stack([(v[1 + 2 * i] - v[2 + 2 * i]) / (2 * step[i]) for i in range(4)])
        H = np.zeros((4, 4) + f0.shape)
        for i in range(4):
            H[i, i] = (v[1 + 2 * i] - 2 * f0 + v[2 + 2 * i]) / step[i] ** 2
        k = 9
        for i in range(4):
            for j in range(i + 1, 4):
                pp, pm, mp, mm = v[k : k + 4]
                H[i, j] = H[j, i] = (pp - pm - mp + mm) / (4 * step[i] * step[j])
                k += 4
        return grad, H

    g1, H1 = derivs(vals[:n], h)
    g2, H2 = derivs(vals[n:], h / 2)
    grad = (4 * g2 - g1) / 3
    H = (4 * H2 - H1) / 3
    G = christoffel(m, p)
    ginv = np.linalg.inv(m.values(p))
    lap = np.einsum("ij,ij...->...", ginv, H) - np.einsum("ij,kij,k...->...", ginv, G, grad)
    lap1 = np.einsum("ij,ij...->...", ginv, H1) - np.einsum("ij,kij,k...->...", ginv, G, g1)
    lap2 = np.einsum("ij,ij...->...", ginv, H2) - np.einsum("ij,kij,k...->...", ginv, G, g2)
    return lap, np.abs(lap2 - lap1) / 3
