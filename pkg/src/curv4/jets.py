"""Second-order forward-mode jets in four variables.

A :class:`Jet2` carries a value, its gradient and its Hessian with respect to
the four chart coordinates.  All three fields may carry a leading batch shape,
so one jet can describe an expression evaluated at many points at once::

    value: shape B
    grad:  shape B + (4,)
    hess:  shape B + (4, 4)

The Hessian is symmetric by construction: every update adds either a symmetric
outer product or a symmetrised pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation

NDIM = 4


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


@dataclass(frozen=True)
class Jet2:
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    @classmethod
    def constant(cls, c):
        c = np.asarray(c, dtype=float)
        return cls(c, np.zeros(c.shape + (NDIM,)), np.zeros(c.shape + (NDIM, NDIM)))

    @classmethod
    def variable(cls, x, index):
        """Jet of coordinate ``index`` at points ``x`` (shape B + (4,))."""
        x = np.asarray(x, dtype=float)
        value = x[..., index]
        grad = np.zeros(x.shape)
        grad[..., index] = 1.0
        return cls(value, grad, np.zeros(x.shape[:-1] + (NDIM, NDIM)))

    @property
    def shape(self):
        return np.shape(self.value)

    def is_constant(self):
        return not (np.any(self.grad) or np.any(self.hess))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _lift(other)
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) + (-self)

    def __mul__(self, other):
        other = _lift(other)
        u, v = self, other
        uv = np.asarray(u.value)[..., None]
        vv = np.asarray(v.value)[..., None]
        grad = uv * v.grad + vv * u.grad
        cross = _outer(u.grad, v.grad)
        # pair the cross terms first so rounding cannot break the symmetry
        cross = cross + np.swapaxes(cross, -1, -2)
        hess = uv[..., None] * v.hess + vv[..., None] * u.hess + cross
        return Jet2(u.value * v.value, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * reciprocal(_lift(other))

    def __rtruediv__(self, other):
        return _lift(other) * reciprocal(self)

    def apply(self, f0, f1, f2):
        """Chain rule for a scalar function with value f0, slope f1, curvature f2."""
        f1 = np.asarray(f1)[..., None]
        f2 = np.asarray(f2)[..., None, None]
        return Jet2(
            np.asarray(f0),
            f1 * self.grad,
            f2 * _outer(self.grad, self.grad) + f1[..., None] * self.hess,
        )

    def ipow(self, n):
        """Integer power by repeated multiplication (negative n via reciprocal)."""
        if n == 0:
            return Jet2.constant(np.ones(self.shape))
        base = self if n > 0 else reciprocal(self)
        n = abs(n)
        result = None
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result


def _lift(x):
    return x if isinstance(x, Jet2) else Jet2.constant(x)


def _require(mask, what):
    if not np.all(mask):
        raise DomainViolation(what)


def check_finite(jet, what):
    if not (
        np.all(np.isfinite(jet.value))
        and np.all(np.isfinite(jet.grad))
        and np.all(np.isfinite(jet.hess))
    ):
        raise DomainViolation(f"non-finite result in {what}")
    return jet


def reciprocal(u):
    _require(np.asarray(u.value) != 0.0, "division by zero")
    r = 1.0 / u.value
    return check_finite(u.apply(r, -r * r, 2.0 * r * r * r), "division")


def sin(u):
    s, c = np.sin(u.value), np.cos(u.value)
    return u.apply(s, c, -s)


def cos(u):
    s, c = np.sin(u.value), np.cos(u.value)
    return u.apply(c, -s, -c)


def tan(u):
    c = np.cos(u.value)
    _require(c != 0.0, "tan at a pole")
    t = np.tan(u.value)
    sec2 = 1.0 + t * t
    return check_finite(u.apply(t, sec2, 2.0 * t * sec2), "tan")


def exp(u):
    e = np.exp(u.value)
    return check_finite(u.apply(e, e, e), "exp")


def log(u):
    _require(np.asarray(u.value) > 0.0, "log of a non-positive value")
    r = 1.0 / u.value
    return u.apply(np.log(u.value), r, -r * r)


def sqrt(u):
    # sqrt(0) has an infinite slope, so the jet needs a strictly positive argument
    _require(np.asarray(u.value) > 0.0, "sqrt of a non-positive value")
    q = np.sqrt(u.value)
    return u.apply(q, 0.5 / q, -0.25 / (q * u.value))


def sinh(u):
    s, c = np.sinh(u.value), np.cosh(u.value)
    return check_finite(u.apply(s, c, s), "sinh")


def cosh(u):
    s, c = np.sinh(u.value), np.cosh(u.value)
    return check_finite(u.apply(c, s, c), "cosh")


def tanh(u):
    t = np.tanh(u.value)
    d = 1.0 - t * t
    return u.apply(t, d, -2.0 * t * d)


def atan(u):
    d = 1.0 / (1.0 + u.value * u.value)
    return u.apply(np.arctan(u.value), d, -2.0 * u.value * d * d)


def power(base, expo):
    """``base ** expo`` for jets.

    A constant integral exponent goes through :meth:`Jet2.ipow`; anything else
    needs a strictly positive base.
    """
    if expo.is_constant():
        e = np.asarray(expo.value)
        if e.ndim == 0 or np.all(e == e.flat[0]):
            e0 = float(e.flat[0])
            if e0.is_integer() and abs(e0) <= 64:
                return base.ipow(int(e0))
            _require(np.asarray(base.value) > 0.0, "non-integer power of a non-positive base")
            p = base.value ** e0
            return check_finite(
                base.apply(p, e0 * p / base.value, e0 * (e0 - 1.0) * p / base.value**2),
                "power",
            )
    _require(np.asarray(base.value) > 0.0, "non-integer power of a non-positive base")
    return exp(expo * log(base))


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "atan": atan,
}
