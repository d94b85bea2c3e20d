"""Curvature diagnostics for four-dimensional Riemannian metrics.

Metrics are given by expressions on a coordinate box; curvature comes from
exact second-order jets, and the self-dual/anti-self-dual split, biorthogonal
curvature and the pinching inequalities are built on top.
"""

__version__ = "0.1.0"

from .biorthogonal import (
    BiorthogonalResult,
    TwoPlane,
    biorthogonal_curvature,
    k1perp_bruteforce,
    k1perp_closed,
    sectional,
)
from .catalog import CatalogEntry, get_entry
from .duality import CurvatureBlocks, WeylSpectrum, curvature_blocks, eig_sym3, weyl_spectrum
from .errors import Curv4Error, InputError, NumericError
from .expr import eval_jet2, evaluate, parse, unparse
from .geometry import (
    RiemannAtPoint,
    covariant_derivative_W,
    curvature_at,
    curvature_field,
    div_weyl,
    laplace_beltrami,
)
from .jets import Jet2
from .metric import MetricField
from .pinch import (
    PinchInputs,
    ThresholdSet,
    check_det_bound,
    check_refined_kato,
    check_weitzenbock,
    discriminant_analysis,
    pinch_report,
    thresholds,
)
from .spectral import Lambda1Estimate, lambda1_estimate

__all__ = [
    "BiorthogonalResult",
    "CatalogEntry",
    "Curv4Error",
    "CurvatureBlocks",
    "InputError",
    "Jet2",
    "Lambda1Estimate",
    "MetricField",
    "NumericError",
    "PinchInputs",
    "RiemannAtPoint",
    "ThresholdSet",
    "TwoPlane",
    "WeylSpectrum",
    "biorthogonal_curvature",
    "check_det_bound",
    "check_refined_kato",
    "check_weitzenbock",
    "covariant_derivative_W",
    "curvature_at",
    "curvature_blocks",
    "curvature_field",
    "discriminant_analysis",
    "div_weyl",
    "eig_sym3",
    "eval_jet2",
    "evaluate",
    "get_entry",
    "k1perp_bruteforce",
    "k1perp_closed",
    "lambda1_estimate",
    "laplace_beltrami",
    "parse",
    "pinch_report",
    "sectional",
    "thresholds",
    "unparse",
    "weyl_spectrum",
]
