"""Randomized identities shared by the unit suites and the acceptance run.

Each property takes a ``random.Random`` and returns True when the identity
holds for the instance it draws.
"""

import random
from fractions import Fraction

import mpmath

from kglie.catalog import case_instances
from kglie.equiv import act_on_f, pushforward_vf
from kglie.expr import SamplingExhausted, SingularPoint, diff, evaluate, is_zero, normalize, sub
from kglie.symcheck import is_symmetry
from kglie.vfield import VectorField, bracket

from randgen import expression, transform, vector_field


def antisymmetry(rng: random.Random) -> bool:
    a, b = vector_field(rng), vector_field(rng)
    return (bracket(a, b) + bracket(b, a)).is_zero()


def jacobi(rng: random.Random) -> bool:
    a, b, c = vector_field(rng), vector_field(rng), vector_field(rng)
    total = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
    return total.is_zero()


def closure(rng: random.Random) -> bool:
    a, b = vector_field(rng), vector_field(rng)
    c = bracket(a, b)
    shape = isinstance(c, VectorField) and c.eta1 == 0
    shape = shape and c.tau.kind is not None and set(map(str, _vars(c.tau))) <= {"t"}
    shape = shape and set(_vars(c.xi)) <= {"x"} and set(_vars(c.eta0)) <= {"t", "x"}
    tau = sub(c.tau, sub(a.tau * diff(b.tau, "t"), b.tau * diff(a.tau, "t")))
    xi = sub(c.xi, sub(a.xi * diff(b.xi, "x"), b.xi * diff(a.xi, "x")))
    return shape and is_zero(tau) and is_zero(xi)


def _vars(e):
    from kglie.expr import free_vars

    return free_vars(e)


def idempotence(rng: random.Random) -> bool:
    e = expression(rng, ("t", "x", "u"))
    return normalize(normalize(e)) == normalize(e)


def mixed_partials(rng: random.Random) -> bool:
    e = expression(rng, ("t", "x"))
    return is_zero(sub(diff(diff(e, "t"), "x"), diff(diff(e, "x"), "t")))


def finite_differences(rng: random.Random) -> bool:
    e = expression(rng, ("t", "x"))
    d = diff(e, "t")
    point = {"t": Fraction(rng.randint(400, 1200), 1000), "x": Fraction(rng.randint(400, 1200), 1000)}
    h = Fraction(1, 10**8)
    with mpmath.workprec(256):
        plus, _ = evaluate(e, {**point, "t": point["t"] + h})
        minus, _ = evaluate(e, {**point, "t": point["t"] - h})
        value, _ = evaluate(d, point)
        fd = (plus - minus) / (2 * mpmath.mpf(h.numerator) / h.denominator)
        return abs(value - fd) <= 1e-6 * (1 + abs(value))


def _symmetric(f, q) -> bool:
    return is_symmetry(f, q)


def residual_equivariance(rng: random.Random, f, generators, transforms=5) -> bool:
    """is_symmetry(f, Q) agrees with is_symmetry on the transformed pair, for
    the case generators and one field that is not a symmetry."""
    fields = list(generators) + [vector_field(rng)]
    for _ in range(transforms):
        tr = transform(rng)
        f_new = act_on_f(tr, f)
        for q in fields:
            try:
                if _symmetric(f, q) != _symmetric(f_new, pushforward_vf(tr, q)):
                    return False
            except (SamplingExhausted, SingularPoint):
                return False
    return True


def finite_cases():
    return [rec for rec in case_instances() if rec.finite and rec.generators]


def run(prop, seed: int, count: int) -> bool:
    rng = random.Random(f"property|{prop.__name__}|{seed}")
    return all(prop(rng) for _ in range(count))


def equivariance_suite(seed: int, transforms: int = 5) -> bool:
    rng = random.Random(f"property|equivariance|{seed}")
    return all(residual_equivariance(rng, rec.f_template, rec.generators, transforms) for rec in finite_cases())
