"""Parse a metric component and read off its value, gradient and Hessian in one pass."""
import numpy as np

from curv4 import eval_jet2, parse, unparse

e = parse("exp(-x0^2) * sin(a*x1) + x2*x3", params=["a"])
print("parsed      :", unparse(e))

p = np.array([0.3, 0.7, -1.0, 2.0])
jet = eval_jet2(e, p, {"a": 1.5})
print("value       :", float(jet.value))
print("gradient    :", np.round(jet.grad, 6))
print("hessian     :\n", np.round(jet.hess, 6))

# second derivatives come out symmetric bit for bit
print("symmetric   :", np.array_equal(jet.hess, jet.hess.T))

for bad in ["sin(x0", "log(x0)"]:
    try:
        print(bad, "->", float(eval_jet2(parse(bad), np.zeros(4)).value))
    except Exception as exc:
        print(f"{bad!r:12}-> {type(exc).__name__}: {exc}")
