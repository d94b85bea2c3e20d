import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from curv4 import jets
from curv4.errors import (
    ArityError,
    DomainViolation,
    ExprSyntaxError,
    MissingParameterError,
    UnknownIdentifierError,
)
from curv4.expr import BinOp, Call, Coord, Neg, Num, Param, Pi, eval_jet2, evaluate, free_params, parse, unparse
from curv4.jets import Jet2

from oracles import richardson_derivatives


def jet(src, p, **params):
    return eval_jet2(parse(src, params=tuple(params)), p, params)


# -- worked examples --------------------------------------------------------------


def test_linear_polynomial():
    assert evaluate(parse("x0 + 2*x1"), [1, 2, 0, 0]) == 5


def test_exact_constant():
    assert evaluate(parse("sin(pi/2)"), np.zeros(4)) == pytest.approx(1.0, abs=1e-15)


def test_stereographic_factor_at_origin():
    j = jet("4/(1 + x0^2 + x1^2 + x2^2 + x3^2)^2", np.zeros(4))
    assert j.value == 4
    assert np.all(j.grad == 0)


def test_monomial_jet():
    j = jet("x0^2", [3, 0, 0, 0])
    assert j.value == 9
    assert j.grad[0] == 6
    assert j.hess[0, 0] == 2
    assert np.count_nonzero(j.hess) == 1


def test_exp_jet():
    j = jet("exp(x1)", np.zeros(4))
    assert (j.value, j.grad[1], j.hess[1, 1]) == (1, 1, 1)


def test_sin_cos_matches_finite_differences():
    p = np.array([0.3, 0.7, 0, 0])
    e = parse("sin(x0)*cos(x1)")
    j = eval_jet2(e, p)
    f = lambda x: float(evaluate(e, x))
    G, H = richardson_derivatives(f, p, h=1e-5 * 20)
    assert np.allclose(j.grad, G, rtol=1e-7, atol=1e-9)
    assert np.allclose(j.hess, H, rtol=1e-7, atol=1e-8)


# -- grammar ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "src, expected",
    [
        ("2 + 3*4", 14),
        ("2^3^2", 512),  # right associative
        ("-2^2", -4),  # ^ binds tighter than unary minus
        ("(-2)^2", 4),
        ("2*-3", -6),
        ("8/4/2", 1),
        ("10 - 4 - 3", 3),
        ("2**3", 8),
        ("1e-3*1e3", 1),
        (".5 + 1.", 1.5),
    ],
)
def test_precedence(src, expected):
    assert evaluate(parse(src), np.zeros(4)) == pytest.approx(expected)


@pytest.mark.parametrize(
    "src, offset",
    [("x0 + ", 5), ("x0 $ x1", 3), ("(x0", 3), ("x0 x1", 3), ("", 0), ("sin(x0", 6)],
)
def test_syntax_error_offsets(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse("x4 + 1")
    with pytest.raises(UnknownIdentifierError):
        parse("foo(x0)")
    with pytest.raises(ExprSyntaxError):
        parse("x0(x1)")


def test_arity():
    with pytest.raises(ArityError):
        parse("sin(x0, x1)")
    with pytest.raises(ArityError):
        parse("exp()")


def test_custom_coordinates_and_params():
    e = parse("r^2*sin(theta)^2 + m", coords=("t", "r", "theta", "phi"), params=("m",))
    assert free_params(e) == {"m"}
    assert evaluate(e, [0, 2, math.pi / 2, 0], {"m": 1}) == pytest.approx(5)
    with pytest.raises(MissingParameterError):
        evaluate(e, [0, 2, 1, 0])


@pytest.mark.parametrize("src", ["log(x0)", "sqrt(x0 - 1)", "1/x0", "x0^0.5 + (-1)^0.5"])
def test_domain_violations_are_reported(src):
    with pytest.raises(DomainViolation):
        eval_jet2(parse(src), np.zeros(4))


def test_overflow_is_a_domain_violation():
    with pytest.raises(DomainViolation):
        eval_jet2(parse("exp(exp(x0))"), [10, 0, 0, 0])


def test_integer_power_of_negative_base_is_exact():
    j = jet("x0^3", [-2, 0, 0, 0])
    assert (j.value, j.grad[0], j.hess[0, 0]) == (-8, 12, -12)
    j = jet("x0^-2", [-2, 0, 0, 0])
    assert j.value == 0.25


def test_batched_evaluation_matches_pointwise(rng):
    e = parse("sin(x0*x1) + x2^2/(1 + x3^2)")
    X = rng.normal(size=(5, 4))
    batch = eval_jet2(e, X)
    for k in range(5):
        single = eval_jet2(e, X[k])
        assert np.allclose(batch.value[k], single.value, rtol=0, atol=0)
        assert np.array_equal(batch.hess[k], single.hess)


# -- jet algebra ---------------------------------------------------------------------


def test_hessian_symmetric_by_construction(rng):
    e = parse("exp(x0*x1)*atan(x2 - x3)/sqrt(2 + cos(x0*x3))")
    j = eval_jet2(e, rng.normal(size=(20, 4)))
    assert np.array_equal(j.hess, np.swapaxes(j.hess, -1, -2))


def test_sum_and_product_rules_exact(rng):
    p = rng.normal(size=4)
    a, b = parse("sin(x0)*x1^2"), parse("exp(x2 - x3)")
    ja, jb = eval_jet2(a, p), eval_jet2(b, p)
    for op, combine in (("+", lambda u, v: u + v), ("*", lambda u, v: u * v)):
        direct = eval_jet2(BinOp(op, a, b), p)
        algebra = combine(ja, jb)
        assert np.array_equal(direct.value, algebra.value)
        assert np.array_equal(direct.grad, algebra.grad)
        assert np.array_equal(direct.hess, algebra.hess)


@pytest.mark.parametrize("name", sorted(jets.FUNCTIONS))
def test_each_function_against_fd(name):
    p = np.array([0.4, -0.3, 0.2, 0.7])
    e = parse(f"{name}(0.5 + 0.3*x0 - 0.2*x1*x2 + 0.1*x3^2)")
    j = eval_jet2(e, p)
    G, H = richardson_derivatives(lambda x: float(evaluate(e, x)), p)
    assert np.allclose(j.grad, G, rtol=1e-8, atol=1e-10)
    assert np.allclose(j.hess, H, rtol=1e-7, atol=1e-9)


def test_variable_and_constant_jets():
    v = Jet2.variable(np.array([1.0, 2, 3, 4]), 2)
    assert v.value == 3 and v.grad.tolist() == [0, 0, 1, 0]
    assert Jet2.constant(5.0).is_constant()


# -- random expressions: derivatives against Richardson differences -----------------

_SAFE_UNARY = ("sin", "cos", "atan", "tanh")


def _random_expr(rng, depth):
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.7:
            i = int(rng.integers(4))
            return Coord(i, f"x{i}")
        return Num(float(np.round(rng.uniform(-2, 2), 3)))
    kind = rng.integers(7)
    sub = lambda: _random_expr(rng, depth - 1)
    if kind == 0:
        return Call(str(rng.choice(_SAFE_UNARY)), sub())
    if kind == 1:
        return BinOp(str(rng.choice(["+", "-"])), sub(), sub())
    if kind == 2:
        return BinOp("*", sub(), sub())
    if kind == 3:
        # strictly positive denominator
        return BinOp("/", sub(), BinOp("+", Num(1.5), Call("sin", sub())))
    if kind == 4:
        return BinOp("^", sub(), Num(float(rng.integers(2, 4))))
    if kind == 5:
        return Call(str(rng.choice(["sqrt", "log"])), BinOp("+", Num(1.0), BinOp("^", sub(), Num(2.0))))
    return Neg(sub())


def _clipped(rng, depth):
    # keep magnitudes moderate so the difference quotients stay well conditioned
    return Call("atan", _random_expr(rng, depth - 1)) if rng.random() < 0.5 else _random_expr(rng, depth)


def test_random_expressions_match_richardson():
    rng = np.random.default_rng(2024)
    checked = 0
    worst = 0.0
    while checked < 1000:
        e = _clipped(rng, int(rng.integers(1, 7)))
        p = rng.uniform(-0.8, 0.8, size=4)
        j = eval_jet2(e, p)
        scale = max(1.0, float(np.abs(j.value)), float(np.abs(j.grad).max()), float(np.abs(j.hess).max()))
        if scale > 1e3:
            continue  # difference quotients lose too many digits; not a jet question
        G, H = richardson_derivatives(lambda x: float(evaluate(e, x)), p, h=2e-3)
        err = max(np.abs(j.grad - G).max(), np.abs(j.hess - H).max()) / scale
        worst = max(worst, err)
        assert err <= 1e-6, unparse(e)
        checked += 1
    assert worst <= 1e-6


# -- round trip ----------------------------------------------------------------------

_leaf = st.one_of(
    st.integers(0, 3).map(lambda i: Coord(i, f"x{i}")),
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(Num),
    st.just(Pi()),
    st.just(Param("a")),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from(sorted(jets.FUNCTIONS)), children).map(lambda t: Call(*t)),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "^"]), children, children).map(lambda t: BinOp(*t)),
    )


_exprs = st.recursive(_leaf, _extend, max_leaves=24)


def _depth(e):
    if isinstance(e, BinOp):
        return 1 + max(_depth(e.left), _depth(e.right))
    if isinstance(e, (Neg, Call)):
        return 1 + _depth(e.operand if isinstance(e, Neg) else e.arg)
    return 0


@settings(max_examples=400, deadline=None)
@given(_exprs)
def test_unparse_round_trip(e):
    assume(_depth(e) <= 6)
    text = unparse(e)
    again = parse(text, params=("a",))
    assert again == e
    assert unparse(again) == text


def test_product_overflow_is_reported():
    with pytest.raises(DomainViolation):
        eval_jet2(parse("(x0*1e200)*(x0*1e200)"), [1, 0, 0, 0])
