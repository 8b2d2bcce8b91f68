"""High-precision evaluation and the randomized zero test.

Abstract functions are replaced by a deterministic random oracle: the value
of ``F_d(args)`` at sample ``i`` is a hash of (seed, name, multi-index,
rendered arguments, i) mapped to a real number.  Because the key depends on
the derivative order, ``F``, ``F'`` and ``F''`` behave as independent
generic values, which is exactly what makes polynomial identities in the
jets of ``F`` decidable by sampling.

False-accept bound: a nonzero residual that is a polynomial in the oracle
values and the sampled rationals vanishes to within the tolerance at a
random point with probability well below 1e-12 for the expressions in
scope, so ``trials`` independent points give a bound of roughly
``1e-12 ** trials``.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import mpmath

from . import core

__all__ = [
    "SingularPoint",
    "SamplingExhausted",
    "Domain",
    "DEFAULT_DOMAIN",
    "Settings",
    "DEFAULTS",
    "configure",
    "oracle_value",
    "evaluate",
    "evaluate_exact",
    "is_zero",
    "sample_points",
]


class SingularPoint(ArithmeticError):
    """The evaluation point lies on a singular locus of the expression."""


class SamplingExhausted(RuntimeError):
    """Every sampled point hit a singular locus."""


@dataclass(frozen=True)
class Settings:
    seed: int = 0
    trials: int = 25
    precision: int = 256
    tolerance: float = 1e-9


DEFAULTS = Settings()
_current = [DEFAULTS]


def configure(**changes) -> Settings:
    """Replace the process-wide defaults; returns the previous settings."""
    previous = _current[0]
    _current[0] = Settings(**{**previous.__dict__, **changes})
    return previous


def current() -> Settings:
    return _current[0]


@dataclass(frozen=True)
class Domain:
    """Sampling box for rational points.

    Variables not listed in ``ranges`` use ``default``.  ``separations``
    holds ``(a, b, gap)`` triples requiring ``|a - b| >= gap`` whenever both
    variables are present.
    """

    default: tuple[Fraction, Fraction] = (Fraction(1, 4), Fraction(3, 2))
    ranges: tuple[tuple[str, tuple[Fraction, Fraction]], ...] = ()
    separations: tuple[tuple[str, str, Fraction], ...] = (("t", "x", Fraction(1, 8)),)
    denominator: int = 4096

    def bounds(self, name: str) -> tuple[Fraction, Fraction]:
        for key, rng in self.ranges:
            if key == name:
                return rng
        return self.default

    def with_ranges(self, **ranges) -> "Domain":
        merged = dict(self.ranges)
        merged.update({k: (Fraction(a), Fraction(b)) for k, (a, b) in ranges.items()})
        return Domain(self.default, tuple(sorted(merged.items())), self.separations, self.denominator)

    def draw(self, names: Iterable[str], rng: random.Random) -> dict[str, Fraction]:
        names = sorted(names)
        for _ in range(1000):
            point = {}
            for name in names:
                lo, hi = self.bounds(name)
                d = self.denominator
                point[name] = Fraction(rng.randint(int(lo * d), int(hi * d)), d)
            if all(
                abs(point[a] - point[b]) >= gap
                for a, b, gap in self.separations
                if a in point and b in point
            ):
                return point
        raise SamplingExhausted("could not satisfy the domain separations")


DEFAULT_DOMAIN = Domain()


def oracle_value(seed: int, name: str, derivs: tuple, argkeys: tuple, sample: int) -> mpmath.mpf:
    """Generic real in ``±[1/2, 5/2]`` keyed by the abstract-function call."""
    text = f"{seed}|{name}|{','.join(map(str, derivs))}|{'|'.join(argkeys)}|{sample}"
    digest = hashlib.blake2b(text.encode(), digest_size=40).digest()
    bits = int.from_bytes(digest[:32], "big")
    sign = -1 if digest[32] & 1 else 1
    frac = mpmath.mpf(bits) / mpmath.mpf(2) ** 256
    return sign * (mpmath.mpf(1) / 2 + 2 * frac)


class _Evaluator:
    def __init__(self, point: Mapping[str, Fraction], seed: int, sample: int):
        self.env = {k: mpmath.mpf(v.numerator) / v.denominator for k, v in point.items()}
        self.seed = seed
        self.sample = sample
        self.magnitude = mpmath.mpf(0)
        self.memo: dict = {}
        self.tiny = mpmath.mpf(2) ** (-(mpmath.mp.prec // 2))

    def __call__(self, e: core.Expr):
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        v = self._eval(e)
        a = abs(v)
        if a > self.magnitude:
            self.magnitude = a
        self.memo[e] = v
        return v

    def _eval(self, e: core.Expr):
        k = e.kind
        if k == core.NUM:
            return mpmath.mpf(e.data.numerator) / e.data.denominator
        if k == core.VAR:
            try:
                return self.env[e.data]
            except KeyError:
                raise KeyError(f"unbound variable {e.data!r}") from None
        if k == core.ADD:
            return mpmath.fsum(self(a) for a in e.args)
        if k == core.MUL:
            out = mpmath.mpf(1)
            for a in e.args:
                out *= self(a)
            return out
        if k == core.POW:
            b = self(e.args[0])
            p = e.args[1]
            if p.kind == core.NUM and p.data.denominator == 1:
                if abs(b) <= self.tiny and p.data < 0:
                    raise SingularPoint("zero to a negative power")
                return b ** int(p.data)
            pv = self(p)
            if b < 0 or (abs(b) <= self.tiny and pv <= 0):
                raise SingularPoint("non-integer power of a non-positive base")
            return b**pv
        if k == core.FN:
            a = self(e.args[0])
            name = e.data
            if name == "exp":
                return mpmath.exp(a)
            if name == "ln":
                if a <= self.tiny:
                    raise SingularPoint("logarithm of a non-positive value")
                return mpmath.log(a)
            if name == "sin":
                return mpmath.sin(a)
            if name == "cos":
                return mpmath.cos(a)
            if name == "tan":
                c = mpmath.cos(a)
                if abs(c) <= self.tiny:
                    raise SingularPoint("tan pole")
                return mpmath.sin(a) / c
            if name == "cot":
                s = mpmath.sin(a)
                if abs(s) <= self.tiny:
                    raise SingularPoint("cot pole")
                return mpmath.cos(a) / s
            if name == "sinh":
                return mpmath.sinh(a)
            if name == "cosh":
                return mpmath.cosh(a)
            if name == "abs":
                if abs(a) <= self.tiny:
                    raise SingularPoint("abs at zero")
                return abs(a)
            if name == "atan":
                return mpmath.atan(a)
            raise AssertionError(name)
        if k == core.AFN:
            name, derivs = e.data
            for a in e.args:
                self(a)
            keys = tuple(a.render() for a in e.args)
            return oracle_value(self.seed, name, derivs, keys, self.sample)
        raise AssertionError(k)


def evaluate(
    e: core.Expr,
    point: Mapping[str, Fraction],
    seed: int | None = None,
    sample: int = 0,
    precision: int | None = None,
):
    """Evaluate at an exact rational point; returns ``(value, magnitude)``.

    ``magnitude`` is the largest absolute value met at any node, the scale
    against which the zero test's relative tolerance is applied.
    """
    settings = current()
    seed = settings.seed if seed is None else seed
    prec = settings.precision if precision is None else precision
    point = {k: Fraction(v) for k, v in point.items()}
    with mpmath.workprec(prec):
        ev = _Evaluator(point, seed, sample)
        value = ev(e)
        return +value, +ev.magnitude


def evaluate_exact(e: core.Expr, point: Mapping[str, Fraction]) -> Fraction:
    """Exact evaluation of an oracle-free rational expression."""
    memo: dict = {}

    def walk(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        k = node.kind
        if k == core.NUM:
            out = node.data
        elif k == core.VAR:
            out = Fraction(point[node.data])
        elif k == core.ADD:
            out = sum((walk(a) for a in node.args), Fraction(0))
        elif k == core.MUL:
            out = Fraction(1)
            for a in node.args:
                out *= walk(a)
        elif k == core.POW:
            b = walk(node.args[0])
            p = int(node.args[1].data)
            if b == 0 and p < 0:
                raise SingularPoint("division by zero")
            out = b**p
        else:
            raise TypeError("not a rational expression")
        memo[node] = out
        return out

    return walk(e)


def _stream(seed: int, label: str) -> random.Random:
    return random.Random(f"kglie|{seed}|{label}")


def sample_points(names, count: int, seed: int, label: str = "points", domain: Domain | None = None):
    """Deterministic list of ``count`` rational points over ``names``."""
    domain = domain or DEFAULT_DOMAIN
    rng = _stream(seed, label)
    return [domain.draw(names, rng) for _ in range(count)]


def is_zero(
    e: core.Expr,
    domain: Domain | None = None,
    trials: int | None = None,
    seed: int | None = None,
    tolerance: float | None = None,
    precision: int | None = None,
) -> bool:
    """Randomized test that ``e`` vanishes identically on ``domain``.

    Returns False at the first sample where ``|e| > tol * (1 + magnitude)``.
    Raises :class:`SamplingExhausted` if no admissible sample can be found.
    """
    settings = current()
    trials = settings.trials if trials is None else trials
    seed = settings.seed if seed is None else seed
    tol = settings.tolerance if tolerance is None else tolerance
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if e.kind == core.NUM:
        return e.data == 0
    domain = domain or DEFAULT_DOMAIN
    names = core.free_vars(e)
    rng = _stream(seed, "zero-test|" + e.render())
    exact = core.is_rational_expr(e)
    accepted = 0
    attempts = 0
    while accepted < trials:
        if attempts >= 20 * trials + 20:
            if accepted:
                return True
            raise SamplingExhausted(f"no admissible sample point for {e.render()}")
        point = domain.draw(names, rng)
        sample = attempts
        attempts += 1
        try:
            if exact:
                if evaluate_exact(e, point) != 0:
                    return False
            else:
                value, magnitude = evaluate(e, point, seed=seed, sample=sample, precision=precision)
                if abs(value) > tol * (1 + magnitude):
                    return False
        except SingularPoint:
            continue
        accepted += 1
    return True
