"""Seeded generators of random expressions, vector fields and transforms."""

import random
from fractions import Fraction

from kglie.equiv import EquivTransform, SWAP, compose
from kglie.expr import add, fn, mul, num, parse, power, var
from kglie.vfield import VectorField

_UNARY = ("exp", "sin", "cos", "sinh", "cosh")


def rational(rng: random.Random, lo=-4, hi=4, den=3) -> Fraction:
    value = Fraction(0)
    while value == 0:
        value = Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den))
    return value


def expression(rng: random.Random, names=("t", "x"), depth=3):
    """A smooth oracle-free expression, regular on the positive sampling box."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.3:
            return num(rational(rng))
        return var(rng.choice(names))
    kind = rng.randrange(5)
    a = expression(rng, names, depth - 1)
    if kind == 0:
        return add(a, expression(rng, names, depth - 1))
    if kind == 1:
        return mul(a, expression(rng, names, depth - 1))
    if kind == 2:
        return fn(rng.choice(_UNARY), mul(Fraction(1, 2), a))
    if kind == 3:
        return power(a, num(rng.randint(2, 3)))
    # positive argument keeps ln and negative powers regular
    positive = add(num(2), power(a, num(2)))
    return fn("ln", positive) if rng.random() < 0.5 else power(positive, num(-1))


def poly(rng: random.Random, v: str, degree=2):
    return add(*(mul(rational(rng), power(var(v), num(k))) for k in range(degree + 1)))


def vector_field(rng: random.Random) -> VectorField:
    """A random member of the span with polynomial and exponential coefficients."""
    tau = add(poly(rng, "t"), mul(rational(rng), fn("exp", mul(rational(rng, -2, 2), var("t")))))
    xi = add(poly(rng, "x"), mul(rational(rng), fn("sin", var("x"))))
    eta0 = add(mul(var("t"), var("x"), rational(rng)), fn("cos", add(var("t"), mul(2, var("x")))))
    return VectorField(tau, xi, rational(rng), eta0)


# Invertible maps are bijections of the nonzero reals (up to a point), so
# composites never leave the real domain; maps without inverses are only
# used where no inversion happens.
_TIME_MAPS = (
    ("2*t+1", "(t-1)/2"),
    ("-t/3", "-3*t"),
    ("1/t", "1/t"),
    ("3/t-1", "3/(t+1)"),
    ("t^3", None),
    ("exp(t)", None),
)
_SPACE_MAPS = (
    ("3*x-1", "(x+1)/3"),
    ("-x", "-x"),
    ("1/x", "1/x"),
    ("2/(x+1)", "2/x-1"),
    ("x^2", None),
    ("exp(2*x)", None),
)
_SHIFTS = ("0", "t*x", "sin(t)+x^2", "exp(t-x)", "t^2*x")


def transform(rng: random.Random, need_inverse=True) -> EquivTransform:
    """A random element of the equivalence group, optionally with closed-form inverses."""
    while True:
        T, Tinv = rng.choice(_TIME_MAPS)
        X, Xinv = rng.choice(_SPACE_MAPS)
        if need_inverse and (Tinv is None or Xinv is None):
            continue
        break
    tr = EquivTransform(
        T=parse(T),
        X=parse(X),
        C=rational(rng),
        U0=parse(rng.choice(_SHIFTS)),
        Tinv=parse(Tinv) if Tinv else None,
        Xinv=parse(Xinv) if Xinv else None,
        check=False,
    )
    return compose(SWAP, tr) if rng.random() < 0.5 else tr
