"""Built-in model manifolds.

Each entry has an analysis chart (a :class:`MetricField`) plus, for compact
models, a second chart on a box that covers the manifold up to a null set.
The second chart carries the quadrature for Rayleigh quotients, with trial
functions written in that chart (typically ambient embedding coordinates, so
they are smooth functions on the whole manifold).

Every "known" value is re-checked numerically when an entry is built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import UnknownTargetError
from .expr import Expr, evaluate, parse
from .geometry import curvature_field, laplace_beltrami
from .metric import MetricField

PI = np.pi
TH_EPS = 0.05  # keep analysis charts away from coordinate poles


class CatalogVerificationError(AssertionError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    metric: MetricField
    known: dict
    provenance: dict
    spectral: Optional[MetricField] = None
    trial: tuple = ()
    eigenfunction: Optional[Expr] = None
    description: str = ""
    defaults: dict = field(default_factory=dict)

    @property
    def compact(self):
        return bool(self.known.get("compact", False))


def _diag(entries):
    return {f"g{i}{i}": e for i, e in enumerate(entries)}


def _products(fns):
    """Degree <= 2 monomials in the given trial coordinates."""
    out = list(fns)
    for i in range(len(fns)):
        for j in range(i, len(fns)):
            out.append(f"({fns[i]})*({fns[j]})")
    return out


# -- S^4 -----------------------------------------------------------------------

_Q = "(r^2 + x0^2 + x1^2 + x2^2 + x3^2)"
_HYPER = ("psi", "chi", "theta", "phi")
_HYPER_DOMAIN = [[0, PI], [0, PI], [0, PI], [0, 2 * PI]]
_S4_AMBIENT = (
    "sin(psi)*sin(chi)*sin(theta)*cos(phi)",
    "sin(psi)*sin(chi)*sin(theta)*sin(phi)",
    "sin(psi)*sin(chi)*cos(theta)",
    "sin(psi)*cos(chi)",
    "cos(psi)",
)


def _s4_metrics(r, eps):
    """Stereographic and hyperspherical charts of g + eps dY1^2 + 2 eps dY2^2.

    Y1, Y2 are the first two ambient coordinates of S^4(r) in R^5.  With two
    unequal stretches the metric has no S^3 symmetry, so W does not vanish.
    """
    params = {"r": r, "eps": eps}
    conf = f"4*r^4/{_Q}^2"

    def d_stereo(k):
        # d(2 r^2 x_k / q)/dx_i
        return [f"(2*r^2*({_Q}*{int(i == k)} - 2*x{k}*x{i})/{_Q}^2)" for i in range(4)]

    stretch_stereo = [("eps", d_stereo(0)), ("2*eps", d_stereo(1))]
    stretch_hyper = [
        (
            "eps",
            [
                "r*cos(psi)*sin(chi)*sin(theta)*cos(phi)",
                "r*sin(psi)*cos(chi)*sin(theta)*cos(phi)",
                "r*sin(psi)*sin(chi)*cos(theta)*cos(phi)",
                "-r*sin(psi)*sin(chi)*sin(theta)*sin(phi)",
            ],
        ),
        (
            "2*eps",
            [
                "r*cos(psi)*sin(chi)*sin(theta)*sin(phi)",
                "r*sin(psi)*cos(chi)*sin(theta)*sin(phi)",
                "r*sin(psi)*sin(chi)*cos(theta)*sin(phi)",
                "r*sin(psi)*sin(chi)*sin(theta)*cos(phi)",
            ],
        ),
    ]

    def assemble(diag, stretches):
        out = {}
        for i in range(4):
            for j in range(i, 4):
                terms = [diag[i]] if i == j else []
                if eps:
                    terms += [f"{c}*({d[i]})*({d[j]})" for c, d in stretches]
                if terms:
                    out[f"g{i}{j}"] = " + ".join(terms)
        return out

    chart = MetricField.from_strings(
        assemble([conf] * 4, stretch_stereo), [[-4.0 * r, 4.0 * r]] * 4, params, name="s4"
    )
    h = ["r^2", "r^2*sin(psi)^2", "r^2*sin(psi)^2*sin(chi)^2", "r^2*sin(psi)^2*sin(chi)^2*sin(theta)^2"]
    spectral = MetricField.from_strings(
        assemble(h, stretch_hyper), _HYPER_DOMAIN, params, coords=_HYPER, name="s4-hyperspherical"
    )
    return chart, spectral


def _s4(r=1.0):
    chart, spectral = _s4_metrics(r, 0.0)
    return CatalogEntry(
        "s4",
        chart,
        known=dict(
            scalar=12.0 / r**2,
            einstein=True,
            lambda1=4.0 / r**2,
            locally_conformally_flat=True,
            harmonic_weyl=True,
            compact=True,
            volume=8 * PI**2 / 3 * r**4,
        ),
        provenance=dict(
            scalar="constant curvature 1/r^2: s = 12/r^2",
            lambda1="first spherical harmonic, eigenfunction residual checked",
            volume="closed form 8 pi^2 r^4 / 3",
        ),
        spectral=spectral,
        trial=tuple(parse(f, _HYPER) for f in _products(_S4_AMBIENT)),
        eigenfunction=parse(f"(r^2 - x0^2 - x1^2 - x2^2 - x3^2)/{_Q}", params=["r"]),
        description="round sphere of radius r, stereographic chart",
        defaults={"r": r},
    )


def _s4_perturbed(r=1.0, eps=0.5):
    chart, spectral = _s4_metrics(r, eps)
    chart = MetricField(chart.components, chart.domain, chart.params, chart.coords, "s4-perturbed")
    return CatalogEntry(
        "s4-perturbed",
        chart,
        known=dict(einstein=False, harmonic_weyl=False, compact=True),
        provenance=dict(
            construction="round S^4(r) plus eps dY1^2 + 2 eps dY2^2 (two unequal ambient stretches)",
        ),
        spectral=spectral,
        trial=tuple(parse(f, _HYPER) for f in _products(_S4_AMBIENT)),
        description="anisotropic deformation of the round sphere (non-Einstein, non-harmonic Weyl)",
        defaults={"r": r, "eps": eps},
    )


# -- CP^2 ----------------------------------------------------------------------

_QC = "(1 + x0^2 + x1^2 + x2^2 + x3^2)"
_BIANCHI = ("sigma", "theta", "phi", "psi")


def _cp2(c=1.0):
    q2 = f"{_QC}^2"
    entries = {
        "g00": f"c*({_QC} - x0^2 - x1^2)/{q2}",
        "g11": f"c*({_QC} - x0^2 - x1^2)/{q2}",
        "g22": f"c*({_QC} - x2^2 - x3^2)/{q2}",
        "g33": f"c*({_QC} - x2^2 - x3^2)/{q2}",
        "g02": f"-c*(x0*x2 + x1*x3)/{q2}",
        "g13": f"-c*(x0*x2 + x1*x3)/{q2}",
        "g03": f"-c*(x0*x3 - x1*x2)/{q2}",
        "g12": f"c*(x0*x3 - x1*x2)/{q2}",
    }
    chart = MetricField.from_strings(entries, [[-3, 3]] * 4, {"c": c}, name="cp2")
    # cohomogeneity-one chart: g = c (dsigma^2 + sin^2/4 (s1^2 + s2^2) + sin^2 cos^2/4 s3^2)
    bianchi = {
        "g00": "c",
        "g11": "c*sin(sigma)^2/4",
        "g22": "c*(sin(sigma)^2*sin(theta)^2 + sin(sigma)^2*cos(sigma)^2*cos(theta)^2)/4",
        "g33": "c*sin(sigma)^2*cos(sigma)^2/4",
        "g23": "c*sin(sigma)^2*cos(sigma)^2*cos(theta)/4",
    }
    spectral = MetricField.from_strings(
        bianchi, [[0, PI / 2], [0, PI], [0, 2 * PI], [0, 4 * PI]], {"c": c}, coords=_BIANCHI, name="cp2-bianchi"
    )
    # real and imaginary parts of Z_i conj(Z_j) for Z = (cos s, sin s u1, sin s u2)
    zz = (
        "cos(sigma)^2",
        "sin(sigma)^2*cos(theta/2)^2",
        "cos(sigma)*sin(sigma)*cos(theta/2)*cos((psi + phi)/2)",
        "cos(sigma)*sin(sigma)*cos(theta/2)*sin((psi + phi)/2)",
        "cos(sigma)*sin(sigma)*sin(theta/2)*cos((psi - phi)/2)",
        "cos(sigma)*sin(sigma)*sin(theta/2)*sin((psi - phi)/2)",
        "sin(sigma)^2*sin(theta)*cos(phi)",
        "sin(sigma)^2*sin(theta)*sin(phi)",
    )
    return CatalogEntry(
        "cp2",
        chart,
        known=dict(
            scalar=24.0 / c,
            einstein=True,
            locally_conformally_flat=False,
            harmonic_weyl=True,
            compact=True,
            volume=PI**2 / 2 * c**2,
        ),
        provenance=dict(
            scalar="Fubini-Study with holomorphic sectional curvature 4/c: Ric = (6/c) g",
            lambda1="bracket: Lichnerowicz lower bound from sampled Ricci, Rayleigh upper bound",
            volume="closed form pi^2 c^2 / 2",
        ),
        spectral=spectral,
        trial=tuple(parse(f, _BIANCHI) for f in zz),
        description="complex projective plane, Fubini-Study metric scaled by c, affine chart",
        defaults={"c": c},
    )


# -- products ------------------------------------------------------------------

_S2S2 = ("theta1", "phi1", "theta2", "phi2")


def _s2xs2(a=1.0, b=1.0):
    entries = _diag(["a^2", "a^2*sin(theta1)^2", "b^2", "b^2*sin(theta2)^2"])
    dom = [[TH_EPS, PI - TH_EPS], [0, 2 * PI], [TH_EPS, PI - TH_EPS], [0, 2 * PI]]
    params = {"a": a, "b": b}
    chart = MetricField.from_strings(entries, dom, params, coords=_S2S2, name="s2xs2")
    spectral = MetricField.from_strings(
        entries, [[0, PI], [0, 2 * PI], [0, PI], [0, 2 * PI]], params, coords=_S2S2, name="s2xs2-full"
    )
    ambient = (
        "cos(theta1)", "sin(theta1)*cos(phi1)", "sin(theta1)*sin(phi1)",
        "cos(theta2)", "sin(theta2)*cos(phi2)", "sin(theta2)*sin(phi2)",
    )
    lam = min(2 / a**2, 2 / b**2)
    eig = "cos(theta1)" if a >= b else "cos(theta2)"
    return CatalogEntry(
        "s2xs2",
        chart,
        known=dict(
            scalar=2 / a**2 + 2 / b**2,
            einstein=bool(np.isclose(a, b)),
            lambda1=lam,
            locally_conformally_flat=False,
            harmonic_weyl=True,
            compact=True,
            volume=16 * PI**2 * a**2 * b**2,
        ),
        provenance=dict(
            scalar="product of round spheres: 2/a^2 + 2/b^2",
            lambda1="min(2/a^2, 2/b^2), first harmonic of the larger factor",
            harmonic_weyl="locally symmetric (parallel curvature)",
        ),
        spectral=spectral,
        trial=tuple(parse(f, _S2S2) for f in _products(ambient)),
        eigenfunction=parse(eig, _S2S2),
        description="product S^2(a) x S^2(b)",
        defaults=params,
    )


_S1S3 = ("t", "chi", "theta", "phi")


def _s1xs3(L=1.0, r=1.0):
    entries = _diag(["L^2", "r^2", "r^2*sin(chi)^2", "r^2*sin(chi)^2*sin(theta)^2"])
    params = {"L": L, "r": r}
    dom = [[0, 2 * PI], [TH_EPS, PI - TH_EPS], [TH_EPS, PI - TH_EPS], [0, 2 * PI]]
    chart = MetricField.from_strings(entries, dom, params, coords=_S1S3, name="s1xs3")
    spectral = MetricField.from_strings(
        entries, [[0, 2 * PI], [0, PI], [0, PI], [0, 2 * PI]], params, coords=_S1S3, name="s1xs3-full"
    )
    ambient = (
        "cos(t)", "sin(t)",
        "cos(chi)", "sin(chi)*cos(theta)", "sin(chi)*sin(theta)*cos(phi)", "sin(chi)*sin(theta)*sin(phi)",
    )
    circle, sphere = 1 / L**2, 3 / r**2
    return CatalogEntry(
        "s1xs3",
        chart,
        known=dict(
            scalar=6 / r**2,
            einstein=False,
            lambda1=min(circle, sphere),
            locally_conformally_flat=True,
            harmonic_weyl=True,
            compact=True,
            volume=2 * PI * L * 2 * PI**2 * r**3,
        ),
        provenance=dict(
            scalar="flat circle times round S^3(r): 6/r^2",
            lambda1="min(1/L^2, 3/r^2) from the circle and sphere factors",
            locally_conformally_flat="conformal to a domain in flat space via the cylinder picture",
        ),
        spectral=spectral,
        trial=tuple(parse(f, _S1S3) for f in _products(ambient)),
        eigenfunction=parse("cos(t)" if circle <= sphere else "cos(chi)", _S1S3),
        description="S^1(L) x S^3(r); the circle coordinate t has period 2 pi",
        defaults=params,
    )


def _t4(side=2 * PI):
    params = {"side": side}
    chart = MetricField.from_strings(_diag(["1", "1", "1", "1"]), [[0, side]] * 4, params, name="t4")
    fourier = []
    for i in range(4):
        fourier += [f"sin(2*pi*x{i}/side)", f"cos(2*pi*x{i}/side)"]
    return CatalogEntry(
        "t4",
        chart,
        known=dict(
            scalar=0.0,
            einstein=True,
            lambda1=(2 * PI / side) ** 2,
            locally_conformally_flat=True,
            harmonic_weyl=True,
            compact=True,
            volume=side**4,
        ),
        provenance=dict(lambda1="first Fourier mode on the cube of the given side"),
        spectral=chart,
        trial=tuple(parse(f, params=["side"]) for f in fourier),
        eigenfunction=parse("sin(2*pi*x0/side)", params=["side"]),
        description="flat torus R^4 / (side Z)^4",
        defaults=params,
    )


_SCHW = ("tau", "r", "theta", "phi")


def _schwarzschild(m=1.0):
    entries = _diag(["1 - 2*m/r", "1/(1 - 2*m/r)", "r^2", "r^2*sin(theta)^2"])
    dom = [[0, 8 * PI * m], [2.2 * m, 12 * m], [TH_EPS, PI - TH_EPS], [0, 2 * PI]]
    chart = MetricField.from_strings(entries, dom, {"m": m}, coords=_SCHW, name="schwarzschild")
    return CatalogEntry(
        "schwarzschild",
        chart,
        known=dict(
            scalar=0.0,
            einstein=True,
            locally_conformally_flat=False,
            harmonic_weyl=True,
            compact=False,
        ),
        provenance=dict(scalar="Ricci-flat", harmonic_weyl="Einstein, hence delta W = 0"),
        description="Euclidean Schwarzschild of mass m, chart r > 2m (complete but non-compact)",
        defaults={"m": m},
    )


BUILDERS = {
    "s4": _s4,
    "s4-perturbed": _s4_perturbed,
    "cp2": _cp2,
    "s2xs2": _s2xs2,
    "s1xs3": _s1xs3,
    "t4": _t4,
    "schwarzschild": _schwarzschild,
}


def verify_entry(entry: CatalogEntry, n=12, tol=1e-6):
    """Re-derive the entry's known values numerically; raise on mismatch."""
    pts = entry.metric.halton_points(n, margin_frac=0.1)
    cf = curvature_field(entry.metric, pts)
    scale = max(1.0, float(np.max(np.abs(cf.s))))
    if entry.known.get("scalar") is not None:
        err = float(np.max(np.abs(cf.s - entry.known["scalar"])))
        if err > tol * scale:
            raise CatalogVerificationError(f"{entry.name}: scalar curvature off by {err}")
    if "einstein" in entry.known:
        resid = float(np.max(np.linalg.norm(cf.B, axis=(-1, -2))))
        if entry.known["einstein"] != (resid <= tol * scale):
            raise CatalogVerificationError(f"{entry.name}: Einstein flag contradicts residual {resid}")
    if entry.known.get("lambda1") is not None and entry.eigenfunction is not None:
        lam = entry.known["lambda1"]
        for p in pts:
            f = float(evaluate(entry.eigenfunction, p, entry.metric.params))
            lap = laplace_beltrami(entry.metric, entry.eigenfunction, p)
            if abs(lap + lam * f) > tol * max(1.0, lam):
                raise CatalogVerificationError(
                    f"{entry.name}: eigenfunction residual {abs(lap + lam * f)} at {p.tolist()}"
                )
    return True


@lru_cache(maxsize=64)
def _cached(name, items):
    entry = BUILDERS[name](**dict(items))
    verify_entry(entry)
    return entry


def get_entry(name: str, **params) -> CatalogEntry:
    """Build (and verify) a catalog entry; params override the defaults."""
    key = name.lower()
    if key not in BUILDERS:
        raise UnknownTargetError(f"unknown catalog entry {name!r}")
    return _cached(key, tuple(sorted((k, float(v)) for k, v in params.items())))


def catalog():
    """All shipped entries at their default parameters."""
    return [get_entry(name) for name in BUILDERS]


def names():
    return list(BUILDERS)
