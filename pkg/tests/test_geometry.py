import math

import numpy as np
import pytest

from curv4 import duality as du
from curv4.catalog import get_entry, names
from curv4.errors import BoundaryMarginError, NonSPDMetricError
from curv4.expr import parse
from curv4.geometry import (
    christoffel,
    covariant_derivative_W,
    curvature_at,
    curvature_field,
    div_weyl,
    div_weyl_norms,
    laplace_beltrami,
    laplacian_fd,
    nabla_g_residual,
    op_norm_sq,
    orthonormal_frame,
)
from curv4.metric import MetricField

from oracles import christoffel_fd

STEREO = "4/(1 + x0^2 + x1^2 + x2^2 + x3^2)^2"
BOX = [[-2, 2]] * 4


def diag_metric(entries, domain=BOX, params=None):
    return MetricField.from_strings({f"g{i}{i}": e for i, e in enumerate(entries)}, domain, params)


def round_s4(factor="1"):
    return diag_metric([f"({factor})*{STEREO}"] * 4, [[-4, 4]] * 4)


# -- Christoffel symbols ---------------------------------------------------------------


def test_flat_christoffel_vanishes():
    assert np.all(christoffel(diag_metric(["1"] * 4), [0.3, 0.1, -1, 1]) == 0)


def test_sphere_christoffel_matches_fd():
    m = round_s4()
    p = np.array([1.0, 0, 0, 0])
    G = christoffel(m, p)
    assert np.allclose(G, christoffel_fd(m.values, p), atol=1e-8)
    assert np.allclose(G, np.swapaxes(G, 1, 2))


def test_polar_type_christoffel():
    m = diag_metric(["1", "x0^2", "1", "1"], [[0.5, 3], [-1, 1], [-1, 1], [-1, 1]])
    G = christoffel(m, [2, 0, 0, 0])
    assert G[0, 1, 1] == pytest.approx(-2)
    assert G[1, 0, 1] == pytest.approx(0.5) and G[1, 1, 0] == pytest.approx(0.5)
    assert np.count_nonzero(np.abs(G) > 1e-15) == 3
    assert np.allclose(G, christoffel_fd(m.values, np.array([2.0, 0, 0, 0])), atol=1e-8)


@pytest.mark.parametrize("name", names())
def test_metric_compatibility(name, rng):
    m = get_entry(name).metric
    for p in m.halton_points(10, margin_frac=0.1):
        assert nabla_g_residual(m, p) <= 1e-9


# -- curvature --------------------------------------------------------------------------


def test_round_sphere_riemann_in_frame():
    rap = curvature_at(round_s4(), [0.4, -1.2, 0.3, 2.0])
    d = np.eye(4)
    expected = np.einsum("ac,bd->abcd", d, d) - np.einsum("ad,bc->abcd", d, d)
    assert np.allclose(rap.R, expected, atol=1e-12)
    assert rap.s == pytest.approx(12)
    assert np.allclose(rap.W, 0, atol=1e-12) and np.allclose(rap.B_tensor, 0, atol=1e-12)


def test_flat_torus():
    rap = curvature_at(get_entry("t4").metric, [1, 2, 3, 4])
    assert np.all(rap.R == 0) and rap.s == 0


def test_product_of_unequal_spheres():
    rap = curvature_at(get_entry("s2xs2", a=1.0, b=2.0).metric, [1.0, 0.5, 2.0, 3.0])
    assert rap.s == pytest.approx(2.5)
    assert np.allclose(rap.ricci_eigenvalues(), [0.25, 0.25, 1, 1])
    assert np.allclose(np.linalg.eigvalsh(rap.B_tensor), [-0.375, -0.375, 0.375, 0.375])


@pytest.mark.parametrize("name", names())
def test_riemann_invariants_on_catalog(name):
    m = get_entry(name).metric
    rng = np.random.default_rng(abs(hash(name)) % 2**32)
    lo, hi = m.domain[:, 0], m.domain[:, 1]
    X = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), size=(100, 4))
    cf = curvature_field(m, X)
    for k in range(len(cf)):
        rap = cf.at(k)
        scale = max(1.0, float(np.abs(rap.R).max()))
        assert rap.bianchi_residual() <= 1e-9 * scale
        assert rap.symmetry_residual() <= 1e-9 * scale
        assert rap.weyl_trace_residual() <= 1e-9 * scale
        assert abs(np.trace(rap.B_tensor)) <= 1e-10 * scale
        assert rap.s == pytest.approx(np.trace(rap.Ric), abs=1e-10 * scale)
        e = rap.frame
        assert np.allclose(e.T @ rap.g @ e, np.eye(4), atol=1e-10)
        assert np.linalg.det(e) > 0


def _invariants(rap):
    cb = du.curvature_blocks(rap)
    ws = du.weyl_spectrum(cb)
    return np.concatenate(
        [[rap.s, ws.norm_plus_sq, ws.norm_minus_sq, np.linalg.norm(rap.B_tensor)], ws.wplus, ws.wminus]
    )


@pytest.mark.parametrize("name", ["s4-perturbed", "s2xs2", "schwarzschild", "cp2"])
def test_frame_independence(name, rng):
    m = get_entry(name, **({"b": 2.0} if name == "s2xs2" else {})).metric
    for p in m.halton_points(5, margin_frac=0.1):
        ref = _invariants(curvature_at(m, p))
        for _ in range(3):
            seed = rng.normal(size=(4, 4))
            other = _invariants(curvature_at(m, p, seed=seed))
            assert np.allclose(ref, other, atol=1e-9 * max(1.0, np.abs(ref).max()))


def test_orientation_correction(rng):
    g = np.eye(4)
    seed = np.diag([1.0, 1, 1, -1])
    e = orthonormal_frame(g, seed)
    assert np.linalg.det(e) > 0
    assert np.allclose(e.T @ g @ e, np.eye(4))


def test_scaling_law(rng):
    m = get_entry("s2xs2", a=1.0, b=2.0).metric
    p = np.array([1.0, 0.5, 2.0, 3.0])
    base = curvature_at(m, p)
    for c in (0.5, 2.0, 3.0):
        sc = curvature_at(m.scaled(c), p)
        assert sc.s == pytest.approx(base.s / c)
        assert np.allclose(sc.R, base.R / c)
        cb0, cb1 = du.curvature_blocks(base), du.curvature_blocks(sc)
        k0 = 0.5 * (du.weyl_spectrum(cb0).wplus[0] + du.weyl_spectrum(cb0).wminus[0]) + cb0.s / 12
        k1 = 0.5 * (du.weyl_spectrum(cb1).wplus[0] + du.weyl_spectrum(cb1).wminus[0]) + cb1.s / 12
        assert k1 == pytest.approx(k0 / c)
        assert np.linalg.norm(sc.B_tensor) > 0.1 / c


def test_non_spd_metric_is_rejected():
    m = diag_metric(["1", "1", "1", "x0"], [[-1, 1]] * 4)
    with pytest.raises(NonSPDMetricError):
        curvature_at(m, [-0.5, 0, 0, 0])
    with pytest.raises(NonSPDMetricError):
        christoffel(m, [-0.5, 0, 0, 0])


# -- derivatives of the Weyl tensor -------------------------------------------------------


@pytest.mark.parametrize(
    "name, point",
    [
        ("s4", [0.3, 0.2, -0.1, 0.5]),
        ("cp2", [0.2, -0.3, 0.4, 0.1]),
        ("s2xs2", [1.0, 0.5, 2.0, 3.0]),
        ("t4", [1.0, 2.0, 3.0, 4.0]),
    ],
)
def test_symmetric_spaces_have_parallel_weyl(name, point):
    wd = covariant_derivative_W(get_entry(name).metric, point)
    assert math.sqrt(wd.grad_W_sq) <= 1e-4


def test_flat_torus_derivatives_vanish():
    wd = covariant_derivative_W(get_entry("t4").metric, [1.0, 2, 3, 4])
    assert np.all(wd.nabla_W == 0) and wd.grad_abs_W_sq == 0


def test_schwarzschild_weyl_derivative_closed_form():
    # for mass 1 in the operator norm: |nabla W+|^2 = 90 (r - 2)/r^9, |nabla |W+||^2 = 54 (r - 2)/r^9
    m = get_entry("schwarzschild").metric
    for r in (2.5, 3.0, 4.5):
        wd = covariant_derivative_W(m, [1.0, r, 1.2, 2.0])
        f = (r - 2) / r**9
        assert wd.grad_Wplus_sq == pytest.approx(90 * f, rel=1e-6)
        assert wd.grad_abs_Wplus_sq == pytest.approx(54 * f, rel=1e-6)
        assert wd.Wplus_sq == pytest.approx(6 / r**6, rel=1e-9)
        assert math.sqrt(wd.grad_abs_Wplus_sq) <= math.sqrt(0.6 * wd.grad_Wplus_sq) + 1e-6


def test_div_weyl_splits_into_halves():
    m = get_entry("s4-perturbed").metric
    for p in m.halton_points(4, margin_frac=0.2):
        d = div_weyl(m, p)
        assert d.norm_sq == pytest.approx(d.norm_plus_sq + d.norm_minus_sq, rel=1e-8)


def test_div_weyl_on_harmonic_examples():
    assert div_weyl(get_entry("s4").metric, [0.3, 0.1, 0.2, -0.4]).norm <= 1e-8
    assert div_weyl(get_entry("cp2").metric, [0.2, -0.3, 0.4, 0.1]).norm <= 1e-4


def test_conformal_rescaling_of_sphere_stays_conformally_flat():
    # a pointwise conformal factor leaves W = 0, so this perturbation cannot break delta W = 0
    m = round_s4("1 + 0.1*sin(x0)")
    for p in ([0.3, 0.1, 0.2, -0.4], [1.0, -0.5, 0.7, 0.2]):
        rap = curvature_at(m, p)
        assert np.abs(rap.W).max() <= 1e-10
        assert np.linalg.norm(rap.B_tensor) > 1e-2  # not Einstein
        assert div_weyl(m, p).norm <= 1e-6


def test_generic_perturbation_is_not_harmonic():
    pert = diag_metric([STEREO, f"(1 + 0.1*sin(x0))*{STEREO}", STEREO, STEREO], [[-4, 4]] * 4)
    assert div_weyl(pert, [0.3, 0.1, 0.2, -0.4]).norm > 1e-3
    m = get_entry("s4-perturbed").metric
    norms = div_weyl_norms(m, m.halton_points(8, margin_frac=0.2))[0]
    assert np.all(norms > 1e-3)


def test_boundary_margin():
    m = get_entry("cp2").metric
    with pytest.raises(BoundaryMarginError):
        covariant_derivative_W(m, [2.9999, 0, 0, 0])
    with pytest.raises(BoundaryMarginError):
        nabla_g_residual(m, [-3.0, 0, 0, 0])


# -- Laplace-Beltrami ----------------------------------------------------------------------


def test_flat_laplacian_examples():
    m = diag_metric(["1"] * 4)
    assert laplace_beltrami(m, parse("x0^2"), [0.3, 0, 0, 0]) == pytest.approx(2)
    assert laplace_beltrami(m, parse("7"), [0.3, 0, 0, 0]) == 0


def test_first_spherical_harmonic(rng):
    m = round_s4()
    f = parse("2*x0/(1 + x0^2 + x1^2 + x2^2 + x3^2)")
    for p in rng.uniform(-3, 3, size=(20, 4)):
        fv = 2 * p[0] / (1 + p @ p)
        assert laplace_beltrami(m, f, p) == pytest.approx(-4 * fv, abs=1e-8)


def test_fd_laplacian_agrees_with_exact():
    m = get_entry("s2xs2", a=1.0, b=2.0).metric
    src = "cos(theta1) + sin(theta2)*cos(phi2)"
    f = parse(src, coords=m.coords)
    p = np.array([1.0, 0.5, 2.0, 3.0])
    F = lambda X: np.cos(X[:, 0]) + np.sin(X[:, 2]) * np.cos(X[:, 3])
    lap, err = laplacian_fd(m, F, p)
    assert lap == pytest.approx(laplace_beltrami(m, f, p), abs=1e-7)
    assert err < 1e-5


def test_weyl_norm_convention():
    rap = curvature_at(get_entry("cp2").metric, [0.0, 0, 0, 0])
    assert op_norm_sq(du.self_dual_part(rap.W)) == pytest.approx(24)
