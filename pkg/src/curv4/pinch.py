"""Pointwise identities and inequalities behind the pinching theorem.

Norms follow :mod:`curv4.duality`: ``|W+|`` is the Frobenius norm of the 3x3
block and ``det W+`` its determinant.  In that convention the Weitzenbock
formula for a harmonic self-dual Weyl tensor reads::

    Lap |W+|^2 = 2 |nabla W+|^2 + s |W+|^2 - 36 det W+

with ``Lap`` the trace of the Hessian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .catalog import CatalogEntry
from .duality import curvature_blocks, weyl_spectrum
from .errors import (
    InputError,
    NonHarmonicWeylError,
    NotTraceFreeError,
    ZeroLocusError,
)
from .geometry import (
    covariant_derivative_W,
    curvature_at,
    curvature_field,
    grad_abs_sq,
    laplacian_fd,
    op_norm_sq,
    weyl_derivative_field,
)
from . import duality, spectral
from .metric import MetricField
from .survey import Survey, survey

SQRT6 = math.sqrt(6.0)
DET_BOUND_COEF = SQRT6 / 18.0
ALPHA0 = 1.0 / 3.0
YANG_CONSTANT = (math.sqrt(1249.0) - 23.0) / 120.0
COSTA_CONSTANT = (2.0 - math.sqrt(2.0)) / 6.0
KATO_CONSTANT = math.sqrt(3.0 / 5.0)

TRACE_TOL = 1e-9
HARMONIC_TOL = 1e-4
KATO_GUARD = 0.01
KATO_TOL = 1e-6
REL_FLOOR = 1e-8


# -- algebraic bounds on trace-free spectra ------------------------------------


@dataclass(frozen=True)
class DetBound:
    det: float
    bound: float
    margin: float


def _spectrum(w, tol=TRACE_TOL):
    w = np.sort(np.asarray(w, dtype=float))
    if w.shape != (3,):
        raise InputError("a spectrum has exactly three eigenvalues")
    if abs(w.sum()) > tol * max(1.0, float(np.abs(w).max())):
        raise NotTraceFreeError(f"spectrum {w.tolist()} is not trace-free (sum {w.sum():.3e})")
    return w


def check_det_bound(spectrum, tol=TRACE_TOL) -> DetBound:
    """det W <= (sqrt6/18) |W|^3 for a trace-free symmetric 3x3 spectrum."""
    w = _spectrum(spectrum, tol)
    det = float(np.prod(w))
    bound = DET_BOUND_COEF * float(np.sum(w**2)) ** 1.5
    return DetBound(det, bound, bound - det)


def det_bound_margins(W):
    """Vectorised ``(sqrt6/18)|W|^3 - det W`` over rows of spectra."""
    W = np.asarray(W, dtype=float)
    return DET_BOUND_COEF * np.sum(W**2, axis=-1) ** 1.5 - np.prod(W, axis=-1)


def eigen_bound_margins(W):
    """Vectorised ``6 w1^2 - |W|^2`` with w1 the smallest eigenvalue."""
    W = np.asarray(W, dtype=float)
    return 6.0 * np.min(W, axis=-1) ** 2 - np.sum(W**2, axis=-1)


def random_trace_free(rng, n, log_scale=(-3.0, 3.0)):
    """Sorted trace-free spectra with magnitudes spread over several decades."""
    W = rng.normal(size=(n, 3))
    W -= W.mean(axis=1, keepdims=True)
    W *= 10.0 ** rng.uniform(*log_scale, size=(n, 1))
    return np.sort(W, axis=1)


@dataclass(frozen=True)
class AlgebraicSuite:
    samples: int
    det_violations: int
    eigen_violations: int
    worst_det_margin: float
    worst_eigen_margin: float
    det_max_ratio: float
    det_argmax: tuple
    equality_residual: float
    tolerance: float

    @property
    def passed(self):
        return self.det_violations == 0 and self.eigen_violations == 0


def algebraic_suite(n=10**6, seed=0, tol=1e-12, chunk=200_000) -> AlgebraicSuite:
    """Fuzz both spectral bounds; violations are counted relative to |W|^3 and |W|^2.

    Also maximises det W / |W|^3 over the sampled directions, which should
    approach sqrt6/18 near (-1, -1, 2)/sqrt6, and checks that the family
    (-a, -a, 2a) gives equality in both bounds.
    """
    rng = np.random.default_rng(seed)
    det_bad = eig_bad = 0
    worst_det = worst_eig = math.inf
    best_ratio, best_dir = -math.inf, None
    done = 0
    while done < n:
        k = min(chunk, n - done)
        W = random_trace_free(rng, k)
        nsq = np.sum(W**2, axis=1)
        dm = det_bound_margins(W) / nsq**1.5
        em = eigen_bound_margins(W) / nsq
        det_bad += int(np.sum(dm < -tol))
        eig_bad += int(np.sum(em < -tol))
        worst_det = min(worst_det, float(dm.min()))
        worst_eig = min(worst_eig, float(em.min()))
        ratio = np.prod(W, axis=1) / nsq**1.5
        j = int(np.argmax(ratio))
        if ratio[j] > best_ratio:
            best_ratio, best_dir = float(ratio[j]), tuple((W[j] / np.sqrt(nsq[j])).tolist())
        done += k
    a = 10.0 ** rng.uniform(-3, 3, size=1000)
    fam = np.stack([-a, -a, 2 * a], axis=1)
    eq = max(
        float(np.max(np.abs(det_bound_margins(fam)) / a**3)),
        float(np.max(np.abs(eigen_bound_margins(fam)) / a**2)),
    )
    return AlgebraicSuite(n, det_bad, eig_bad, worst_det, worst_eig, best_ratio, best_dir, eq, tol)


# -- thresholds ------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdSet:
    new_threshold: float
    old_threshold: float
    yang_constant: float
    costa_constant: float
    corollary_threshold: Optional[float]


def thresholds(s, lambda1, rho=None) -> ThresholdSet:
    if not (s > 0 and lambda1 > 0):
        raise InputError(f"thresholds need s > 0 and lambda1 > 0 (got s={s}, lambda1={lambda1})")
    if rho is not None and not rho > 0:
        raise InputError(f"rho must be positive (got {rho})")
    new = s**2 / (24.0 * (3.0 * lambda1 + s))
    old = s**2 / (8.0 * (3.0 * s + 5.0 * lambda1))
    assert old > new
    cor = None if rho is None else s**2 / (192.0 * rho)
    return ThresholdSet(new, old, YANG_CONSTANT, COSTA_CONSTANT, cor)


# -- the quadratic P(t) and its discriminant -------------------------------------


@dataclass(frozen=True)
class PinchInputs:
    s: float
    lambda1: float
    K1perp: float
    Wplus_norm: float
    Wminus_norm: float
    rho: Optional[float] = None


@dataclass(frozen=True)
class QuadraticP:
    a: object
    c2: object
    c1: object
    c0: object
    discriminant: object
    alpha0: float = ALPHA0


def quadratic_p(s, lambda1, wp, wm, alpha0=ALPHA0) -> QuadraticP:
    """Coefficients of P(t); works elementwise on arrays."""
    s, lambda1, wp, wm = (np.asarray(v, dtype=float) for v in (s, lambda1, wp, wm))
    a = s + 3.0 * lambda1
    c2 = wm ** (2 * alpha0) * (a - 2 * SQRT6 * wm)
    c1 = -6.0 * lambda1 * wp**alpha0 * wm**alpha0
    c0 = wp ** (2 * alpha0) * (a - 2 * SQRT6 * wp)
    return QuadraticP(a, c2, c1, c0, c1**2 - 4.0 * c2 * c0, alpha0)


def _as_float(q: QuadraticP) -> QuadraticP:
    return QuadraticP(*(float(v) for v in (q.a, q.c2, q.c1, q.c0, q.discriminant)), q.alpha0)


@dataclass(frozen=True)
class DiscriminantVerdict:
    quadratic: QuadraticP
    ptin5: bool
    pinching: bool
    claim_holds: Optional[bool]
    sharp_bound: float
    sharp_holds: Optional[bool]
    verdict: str


def discriminant_analysis(pi: PinchInputs, tol=1e-12, sharp_tol=1e-9) -> DiscriminantVerdict:
    if not (pi.s > 0 and pi.lambda1 > 0):
        raise InputError("discriminant analysis needs s > 0 and lambda1 > 0")
    if pi.Wplus_norm < 0 or pi.Wminus_norm < 0:
        raise InputError("Weyl norms are non-negative")
    q = _as_float(quadratic_p(pi.s, pi.lambda1, pi.Wplus_norm, pi.Wminus_norm))
    slack = tol * max(1.0, pi.s)
    ptin5 = pi.Wplus_norm + pi.Wminus_norm <= SQRT6 * (pi.s / 6.0 - 2.0 * pi.K1perp) + slack
    pinching = pi.K1perp >= thresholds(pi.s, pi.lambda1).new_threshold - slack
    sharp = -96.0 * (pi.Wplus_norm * pi.Wminus_norm) ** (2 * ALPHA0 + 1)
    if ptin5 and pinching:
        claim = q.discriminant <= tol
        sharp_ok = q.discriminant <= sharp + sharp_tol
        verdict = "claim verified" if claim and sharp_ok else "claim violated"
    else:
        claim = sharp_ok = None
        verdict = "hypothesis failure"
    return DiscriminantVerdict(q, bool(ptin5), bool(pinching), claim, float(sharp), sharp_ok, verdict)


@dataclass(frozen=True)
class DiscriminantSuite:
    samples: int
    max_discriminant: float
    claim_violations: int
    max_sharp_excess: float
    sharp_violations: int


def discriminant_suite(n=10**5, seed=0, tol=1e-12, sharp_tol=1e-9, s_max=10.0) -> DiscriminantSuite:
    """Random tuples meeting the pinching bound and ptin5, including both boundaries.

    K1perp is drawn between the new threshold and s/12 (where the norm budget
    vanishes), skewed toward the threshold; every tenth tuple saturates ptin5.
    """
    rng = np.random.default_rng(seed)
    s = rng.uniform(1e-3, s_max, n)
    lam = rng.uniform(1e-3, s_max, n)
    new = s**2 / (24.0 * (3.0 * lam + s))
    K = new + rng.uniform(0, 1, n) ** 3 * (s / 12.0 - new)
    K[::7] = new[::7]
    budget = SQRT6 * (s / 6.0 - 2.0 * K)
    t = rng.uniform(0, 1, n)
    t[::10] = 1.0
    u = rng.uniform(0, 1, n)
    wp, wm = budget * t * u, budget * t * (1 - u)
    D = quadratic_p(s, lam, wp, wm).discriminant
    excess = D + 96.0 * (wp * wm) ** (2 * ALPHA0 + 1)
    return DiscriminantSuite(
        n,
        float(D.max()),
        int(np.sum(D > tol)),
        float(excess.max()),
        int(np.sum(excess > sharp_tol)),
    )


# -- field identities ------------------------------------------------------------


@dataclass(frozen=True)
class WeitzenbockTerms:
    laplacian: float
    gradient_term: float
    scalar_term: float
    det_term: float
    residual: float
    relative: float
    tolerance: float
    fd_error: float

    @property
    def passed(self):
        return abs(self.residual) <= self.tolerance


@dataclass(frozen=True)
class WeitzenbockCheck:
    point: tuple
    div_norm: float
    plus: WeitzenbockTerms
    minus: WeitzenbockTerms

    @property
    def passed(self):
        return self.plus.passed and self.minus.passed


def _weyl_half_norms(m):
    def F(X):
        W = curvature_field(m, X).W
        return np.stack([op_norm_sq(duality.self_dual_part(W)), op_norm_sq(duality.anti_self_dual_part(W))], axis=-1)

    return F


def check_weitzenbock(m: MetricField, p, h=None, harmonic_tol=HARMONIC_TOL) -> WeitzenbockCheck:
    """Both halves of the Weitzenbock identity at ``p``; needs delta W = 0 there."""
    p = np.asarray(p, dtype=float)
    wd = covariant_derivative_W(m, p, h)
    div = float(np.sqrt(0.5 * np.sum(wd.div**2)))
    if div > harmonic_tol * max(1.0, math.sqrt(wd.W_sq)):
        raise NonHarmonicWeylError(f"|delta W| = {div:.3e} at {p.tolist()}; the identity does not apply")
    rap = curvature_at(m, p)
    ws = weyl_spectrum(curvature_blocks(rap))
    lap, err = laplacian_fd(m, _weyl_half_norms(m), p, h)

    def terms(k, grad_sq, norm_sq, det):
        g, sc, dt = 2.0 * grad_sq, rap.s * norm_sq, -36.0 * det
        res = float(lap[k] - g - sc - dt)
        scale = max(abs(lap[k]), abs(g), abs(sc), abs(dt))
        # with every term below the FD noise floor a ratio would be noise over noise
        rel = abs(res) / scale if scale > REL_FLOOR else 0.0
        tol = max(1e-3, 1e-2 * abs(sc))
        return WeitzenbockTerms(float(lap[k]), g, sc, dt, res, rel, tol, float(err[k]))

    return WeitzenbockCheck(
        tuple(p.tolist()),
        div,
        terms(0, wd.grad_Wplus_sq, ws.norm_plus_sq, ws.det_plus),
        terms(1, wd.grad_Wminus_sq, ws.norm_minus_sq, ws.det_minus),
    )


@dataclass(frozen=True)
class KatoCheck:
    refined: bool
    margins: tuple
    worst_margin: float
    plain_worst_margin: float
    evaluated: int
    guarded: int
    max_div_plus: float
    fd_error: float
    tolerance: float

    @property
    def passed(self):
        worst = self.worst_margin if self.refined else self.plain_worst_margin
        return worst >= -self.tolerance


def check_refined_kato(
    m: MetricField, points, guard=KATO_GUARD, tol=KATO_TOL, harmonic_tol=HARMONIC_TOL, h=None
) -> KatoCheck:
    """Refined Kato for W+ on harmonic-Weyl samples, plain Kato for W and W+ always.

    Points with ``|W+| <= guard`` are skipped (the zero locus, where ``|W+|``
    is not differentiable); plain Kato uses ``|W|`` for its own guard.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    fld = weyl_derivative_field(m, P, h)
    W, nab = fld.W, fld.nabla_W
    Wp, nWp = duality.self_dual_part(W), duality.self_dual_part(nab)
    wp_norm = np.sqrt(op_norm_sq(Wp))
    w_norm = np.sqrt(op_norm_sq(W))
    div_plus = np.sqrt(0.5 * np.sum(np.einsum("...aabcd->...bcd", nWp) ** 2, axis=(-1, -2, -3)))
    max_div = float(div_plus.max())
    refined = bool(np.all(div_plus <= harmonic_tol * np.maximum(1.0, w_norm)))

    keep_p = wp_norm > guard
    keep = w_norm > guard
    if not np.any(keep_p if refined else keep):
        raise ZeroLocusError(f"all {len(P)} sample points lie inside the zero-locus guard |W| <= {guard}")

    grad_p = np.sqrt(op_norm_sq(nWp, 5))
    grad_abs_p = np.sqrt(grad_abs_sq(Wp, nWp))
    plain = np.concatenate(
        [
            (np.sqrt(op_norm_sq(nab, 5)) - np.sqrt(grad_abs_sq(W, nab)))[keep],
            (grad_p - grad_abs_p)[keep_p],
        ]
    )
    if refined:
        margins = (KATO_CONSTANT * grad_p - grad_abs_p)[keep_p]
        worst = float(margins.min())
    else:
        margins, worst = np.zeros(0), math.nan
    return KatoCheck(
        refined=refined,
        margins=tuple(margins.tolist()),
        worst_margin=worst,
        plain_worst_margin=float(plain.min()),
        evaluated=int(np.sum(keep_p if refined else keep)),
        guarded=int(len(P) - np.sum(keep_p if refined else keep)),
        max_div_plus=max_div,
        fd_error=float(fld.error.max()),
        tolerance=tol,
    )


# -- manifold-level report -------------------------------------------------------

SATISFIED = "hypotheses satisfied"
VIOLATED = "hypotheses violated"
UNDETERMINED = "hypotheses undetermined"


@dataclass(frozen=True)
class Lambda1Choice:
    value: Optional[float]
    source: str
    bracket: Optional[tuple] = None


def resolve_lambda1(entry, m, source, user_value, rho) -> Lambda1Choice:
    """Provenance order for 'auto': user value, catalog value or bracket, Lichnerowicz."""
    if source not in ("auto", "user", "catalog", "lichnerowicz"):
        raise InputError(f"unknown lambda1 source {source!r}")
    if source == "user" or (source == "auto" and user_value is not None):
        if user_value is None or not user_value > 0:
            raise InputError("a positive --lambda1 value is required")
        return Lambda1Choice(float(user_value), "user")
    if source in ("auto", "catalog") and entry is not None:
        exact = entry.known.get("lambda1")
        if exact is not None:
            return Lambda1Choice(float(exact), "catalog-exact", (float(exact), float(exact)))
        if entry.compact and entry.spectral is not None:
            est = spectral.lambda1_estimate(entry)
            return Lambda1Choice(est.lower, "catalog-bracket", (est.lower, est.upper))
        if source == "catalog":
            raise InputError(f"{entry.name}: no catalog value or bracket for lambda1")
    elif source == "catalog":
        raise InputError("lambda1 source 'catalog' needs a catalog target")
    if rho is not None and rho > 0:
        return Lambda1Choice(spectral.lichnerowicz_bound(rho), "lichnerowicz")
    return Lambda1Choice(None, "unavailable")


@dataclass(frozen=True)
class PinchReport:
    target: str
    grid: int
    survey: Survey
    inf_k1perp: float
    inf_s: float
    sup_s: float
    rho: float
    rho_source: str
    lambda1: Optional[float]
    lambda1_source: str
    lambda1_bracket: Optional[tuple]
    thresholds: Optional[ThresholdSet]
    margin_new: Optional[float]
    margin_corollary: Optional[float]
    pointwise_margin_new: Optional[float]
    max_div_weyl: float
    harmonic_weyl: bool
    hypotheses: dict
    verdicts: dict
    normalized: Optional[dict] = None
    tolerances: dict = field(default_factory=dict)


def _check(flag):
    return "unknown" if flag is None else ("yes" if flag else "no")


def pinch_report(
    target: Union[CatalogEntry, MetricField],
    lambda1_source="auto",
    grid=4,
    lambda1=None,
    rho=None,
    harmonic_tol=HARMONIC_TOL,
    margin_tol=1e-9,
) -> PinchReport:
    entry = target if isinstance(target, CatalogEntry) else None
    m = entry.metric if entry is not None else target
    known = dict(entry.known if entry is not None else m.known)
    X = m.interior_points(grid)
    sv = survey(m, X, divergence=True)
    ok = sv.valid
    if not np.any(ok):
        raise InputError(f"no valid sample points for {m.name!r}")
    inf_k, inf_s, sup_s = (float(f(a[ok])) for f, a in ((np.min, sv.k1perp), (np.min, sv.s), (np.max, sv.s)))
    sampled_rho = float(np.min(sv.ric_min[ok]))
    if rho is None:
        rho_val, rho_source = sampled_rho, "sampled"
    else:
        rho_val, rho_source = float(rho), "user"
    lam = resolve_lambda1(entry, m, lambda1_source, lambda1, rho_val)

    div_ok = np.isfinite(sv.div_norm)
    max_div = float(np.max(sv.div_norm[div_ok])) if np.any(div_ok) else math.nan
    wmax = float(np.max(np.hypot(sv.wplus_norm[ok], sv.wminus_norm[ok])))
    harmonic = bool(np.any(div_ok)) and max_div <= harmonic_tol * max(1.0, wmax)
    scale = max(1.0, abs(sup_s))

    th = margin_new = margin_cor = pointwise = None
    if sup_s > 0 and lam.value:
        th = thresholds(sup_s, lam.value, rho_val if rho_val > 0 else None)
        margin_new = inf_k - th.new_threshold
        pts = sv.s[ok] > 0
        if np.any(pts):
            local = sv.s[ok][pts] ** 2 / (24.0 * (3.0 * lam.value + sv.s[ok][pts]))
            pointwise = float(np.min(sv.k1perp[ok][pts] - local))
        if th.corollary_threshold is not None:
            margin_cor = inf_k - th.corollary_threshold

    compact = known.get("compact")
    complete = known.get("complete", True if compact else None)
    all_valid = bool(np.all(ok))
    hyp_a = {
        "compact": _check(compact),
        "harmonic_weyl": _check(harmonic),
        "positive_scalar": _check(inf_s > 0),
        "analytic": "assumed (not checkable numerically)",
        "pinching": "unknown" if margin_new is None else _check(margin_new >= -margin_tol * scale),
        "all_points_valid": _check(all_valid),
    }
    hyp_c = {
        "complete": _check(complete),
        "harmonic_weyl": _check(harmonic),
        "ricci_positive": _check(rho_val > 0),
        "analytic": "assumed (not checkable numerically)",
        "pinching": "unknown" if margin_cor is None else _check(margin_cor >= -margin_tol * scale),
        "all_points_valid": _check(all_valid),
    }

    def verdict(h):
        vals = [v for k, v in h.items() if k != "analytic"]
        if "no" in vals:
            return VIOLATED
        return UNDETERMINED if "unknown" in vals else SATISFIED

    normalized = None
    einstein = bool(np.max(sv.einstein_residual[ok]) <= 1e-6 * scale)
    if einstein and inf_s > 0:
        c = sup_s / 4.0  # rescale so that Ric = 1
        normalized = {
            "ricci_scale": c,
            "k1perp": inf_k / c,
            "yang_constant": YANG_CONSTANT,
            "costa_constant": COSTA_CONSTANT,
            "new_threshold": None if lam.value is None else thresholds(4.0, lam.value / c).new_threshold,
            "corollary_threshold": 1.0 / 12.0,
        }

    return PinchReport(
        target=entry.name if entry is not None else m.name,
        grid=int(grid),
        survey=sv,
        inf_k1perp=inf_k,
        inf_s=inf_s,
        sup_s=sup_s,
        rho=rho_val,
        rho_source=rho_source,
        lambda1=lam.value,
        lambda1_source=lam.source,
        lambda1_bracket=lam.bracket,
        thresholds=th,
        margin_new=margin_new,
        margin_corollary=margin_cor,
        pointwise_margin_new=pointwise,
        max_div_weyl=max_div,
        harmonic_weyl=harmonic,
        hypotheses={"theorem": hyp_a, "corollary": hyp_c},
        verdicts={"theorem": verdict(hyp_a), "corollary": verdict(hyp_c)},
        normalized=normalized,
        tolerances={"harmonic_weyl": harmonic_tol, "margin": margin_tol, "einstein": 1e-6},
    )
