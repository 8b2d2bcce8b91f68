"""Integer invariants of finite-dimensional subalgebras of the symmetry span.

All linear algebra runs on sampled coefficient functions: a candidate
solution space is computed numerically at high precision, rounded to small
rationals, and then certified by an exact zero test on the combined
components.  Structure constants of the algebras in scope are rational, so
certification succeeds whenever the sampled answer is right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import mpmath

from .expr import (
    Domain,
    Expr,
    evaluate,
    evaluate_exact,
    format_rational,
    free_vars,
    has_abstract,
    is_rational_expr,
    is_zero,
    num,
    parse,
    sample_points,
    substitute,
)
from .expr.numeric import current
from .vfield import VectorField, bracket, combine, parse_vf

__all__ = [
    "INF",
    "RankInstability",
    "CertificationError",
    "InvalidSubalgebra",
    "function_rank",
    "CoefficientSpace",
    "Subalgebra",
    "member_subspace",
    "InvariantTuple",
    "tuple12",
    "tuple5",
    "parse_algebra",
    "FIELD_NAMES",
]

INF = math.inf
FIELD_NAMES = ("m", "n", "k", "l", "j1", "j2", "j12", "j13", "j23", "r1", "r2", "r3")


class RankInstability(RuntimeError):
    """Sampled ranks kept disagreeing across re-samples."""


class CertificationError(RuntimeError):
    """A sampled linear relation did not survive the exact zero test."""


class InvalidSubalgebra(ValueError):
    """The basis is linearly dependent or not closed under the bracket."""


def _mpf(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    if not man:
        return Fraction(0)
    value = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -value if sign else value


def _rationalize(x, max_den: int = 10**6) -> Fraction:
    exact = _mpf_to_fraction(x)
    approx = exact.limit_denominator(max_den)
    if abs(exact - approx) > Fraction(1, 10**30) * (1 + abs(approx)):
        raise CertificationError(f"coefficient {mpmath.nstr(x, 20)} is not a small rational")
    return approx


def _eval(e: Expr, point, sample: int):
    if e.is_number:
        return _mpf(e.value)
    value, _ = evaluate(e, {k: point[k] for k in free_vars(e)}, sample=sample)
    return value


def _rank_mp(rows, rel_tol) -> int:
    if not rows or not rows[0]:
        return 0
    A = mpmath.matrix(rows)
    S = mpmath.svd_r(A, compute_uv=False)
    smax = max(abs(S[i]) for i in range(len(S)))
    if smax == 0:
        return 0
    return sum(1 for i in range(len(S)) if abs(S[i]) > rel_tol * smax)


def _rank_exact(rows) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(rank + 1, len(m)):
            if m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def function_rank(
    fns: Sequence[Expr],
    variables: Iterable[str] | None = None,
    samples: int | None = None,
    seed: int | None = None,
    domain: Domain | None = None,
) -> int:
    """Dimension of the span of ``fns`` as functions on the sampling domain."""
    fns = list(fns)
    if not fns:
        return 0
    names = set(variables or ())
    for f in fns:
        names |= free_vars(f)
    count = samples if samples is not None else len(fns) + 4
    if count < len(fns) + 2:
        raise ValueError("need at least len(fns) + 2 samples")
    seed = current().seed if seed is None else seed
    exact = all(is_rational_expr(f) for f in fns)
    results = []
    for attempt in range(4):
        ranks = []
        for half in ("a", "b"):
            pts = sample_points(sorted(names), count, seed, f"rank|{attempt}|{half}", domain)
            if exact:
                rows = [[evaluate_exact(f, p) for p in pts] for f in fns]
                ranks.append(_rank_exact(rows))
            else:
                with mpmath.workprec(current().precision):
                    rows = [[_eval(f, p, i) for i, p in enumerate(pts)] for f in fns]
                    ranks.append(_rank_mp(rows, mpmath.mpf("1e-9")))
        results.append(tuple(ranks))
        if ranks[0] == ranks[1]:
            return ranks[0]
    raise RankInstability(f"rank of {len(fns)} functions unstable across samples: {results}")


# ---------------------------------------------------------------- linear solving


def _solve(rows, rhs):
    """Particular solution and nullspace basis of ``rows @ c = rhs``.

    Returns ``(particular or None, basis)`` with mpmath entries; uses a
    relative pivot tolerance suitable for high-precision sampled data.
    """
    n = len(rows[0]) if rows else 0
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    scale = max((abs(x) for r in m for x in r), default=mpmath.mpf(1)) or mpmath.mpf(1)
    tol = scale * mpmath.mpf(2) ** (-(current().precision // 2))
    pivots = []
    r = 0
    for c in range(n):
        best = max(range(r, len(m)), key=lambda i: abs(m[i][c]), default=None)
        if best is None or abs(m[best][c]) <= tol:
            continue
        m[r], m[best] = m[best], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and abs(m[i][c]) > 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    for i in range(r, len(m)):
        if abs(m[i][n]) > tol:
            return None, _nullspace(m[:r], pivots, n)
    particular = [mpmath.mpf(0)] * n
    for i, c in enumerate(pivots):
        particular[c] = m[i][n]
    return particular, _nullspace(m[:r], pivots, n)


def _nullspace(m, pivots, n):
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [mpmath.mpf(0)] * n
        v[fc] = mpmath.mpf(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis


@dataclass(frozen=True)
class CoefficientSpace:
    """Affine or linear space of rational coefficient vectors."""

    particular: Optional[tuple]
    basis: tuple
    affine: bool = False

    @property
    def empty(self) -> bool:
        return self.particular is None

    @property
    def dim(self) -> int:
        return -1 if self.empty else len(self.basis)


# ---------------------------------------------------------------- subalgebras


def _field_points(count: int, seed: int, label: str):
    return sample_points(["t", "x"], count, seed, label)


def _stacked(q: VectorField, pts, which=("tau", "xi", "eta1", "eta0")) -> list:
    out = []
    for name in which:
        if name == "eta1":
            out.append(_mpf(q.eta1))
            continue
        comp = getattr(q, name)
        out.extend(_eval(comp, p, i) for i, p in enumerate(pts))
    return out


@dataclass(frozen=True)
class Subalgebra:
    basis: tuple
    label: str = ""
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def n(self) -> int:
        return len(self.basis)

    def validate(self) -> dict:
        """Check independence and closure; returns the structure constants.

        The result maps ``(i, j)`` to the coefficient vector of
        ``[Q_i, Q_j]`` in the basis.
        """
        n = self.n
        if n == 0:
            return {}
        seed = current().seed
        with mpmath.workprec(current().precision):
            pts = _field_points(n + 4, seed, "subalgebra")
            cols = [_stacked(q, pts) for q in self.basis]
            rank = _rank_mp(cols, mpmath.mpf("1e-9"))
            if rank != n:
                raise InvalidSubalgebra(f"basis of {n} fields has rank {rank}")
            rows = [list(r) for r in zip(*cols)]
            constants = {}
            for i in range(n):
                for j in range(i + 1, n):
                    b = bracket(self.basis[i], self.basis[j])
                    target = _stacked(b, pts)
                    particular, _ = _solve(rows, target)
                    if particular is None:
                        raise InvalidSubalgebra(f"[Q{i + 1}, Q{j + 1}] leaves the span")
                    try:
                        coeffs = tuple(_rationalize(x) for x in particular)
                    except CertificationError as err:
                        raise InvalidSubalgebra(f"[Q{i + 1}, Q{j + 1}]: {err}") from None
                    if not (b - combine(coeffs, self.basis)).is_zero():
                        raise InvalidSubalgebra(f"[Q{i + 1}, Q{j + 1}] is not a rational combination")
                    constants[(i, j)] = coeffs
        return constants

    def combination(self, coeffs) -> VectorField:
        return combine(coeffs, self.basis)

    def pushforward(self, tr) -> "Subalgebra":
        from .equiv import pushforward_vf

        return Subalgebra(tuple(pushforward_vf(tr, q) for q in self.basis), self.label, self.params)


_CONSTRAINT_NAMES = ("xi0", "tau0", "eta1_0", "eta1_1")


def member_subspace(s: Subalgebra, constraints: Iterable[str] = ()) -> CoefficientSpace:
    """Coefficient vectors ``c`` with ``sum c_i Q_i`` meeting ``constraints``.

    Constraint names: ``xi0`` (xi vanishes), ``tau0`` (tau vanishes),
    ``eta1_0`` (eta1 = 0) and ``eta1_1`` (eta1 = 1, making the space affine).
    """
    constraints = set(constraints)
    unknown = constraints - set(_CONSTRAINT_NAMES)
    if unknown:
        raise ValueError(f"unknown constraints {sorted(unknown)}")
    if {"eta1_0", "eta1_1"} <= constraints:
        raise ValueError("inconsistent constraints")
    n = s.n
    affine = "eta1_1" in constraints
    if n == 0:
        return CoefficientSpace(None if affine else (), (), affine)
    seed = current().seed
    with mpmath.workprec(current().precision):
        pts = _field_points(n + 4, seed, "member")
        rows, rhs = [], []
        if "tau0" in constraints:
            cols = [_stacked(q, pts, ("tau",)) for q in s.basis]
            rows.extend(zip(*cols))
            rhs.extend([mpmath.mpf(0)] * len(pts))
        if "xi0" in constraints:
            cols = [_stacked(q, pts, ("xi",)) for q in s.basis]
            rows.extend(zip(*cols))
            rhs.extend([mpmath.mpf(0)] * len(pts))
        if "eta1_0" in constraints or affine:
            rows.append([_mpf(q.eta1) for q in s.basis])
            rhs.append(mpmath.mpf(1 if affine else 0))
        if not rows:
            basis = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
            return CoefficientSpace(tuple(Fraction(0) for _ in range(n)), basis, False)
        particular, null = _solve([list(r) for r in rows], rhs)
        if particular is None:
            return CoefficientSpace(None, (), affine)
        part = tuple(_rationalize(x) for x in particular)
        basis = tuple(tuple(_rationalize(x) for x in v) for v in null)
    # certification
    checks = [part] if affine else []
    checks.extend(basis)
    for vec in checks:
        q = s.combination(vec)
        if "tau0" in constraints and not is_zero(q.tau):
            raise CertificationError(f"sampled solution {vec} does not kill tau")
        if "xi0" in constraints and not is_zero(q.xi):
            raise CertificationError(f"sampled solution {vec} does not kill xi")
    for vec in basis:
        if ("eta1_0" in constraints or affine) and s.combination(vec).eta1 != 0:
            raise CertificationError("eta1 constraint violated")
    if affine and s.combination(part).eta1 != 1:
        raise CertificationError("eta1 = 1 not met")
    return CoefficientSpace(part if affine else tuple(Fraction(0) for _ in range(n)), basis, affine)


# ---------------------------------------------------------------- tuples


def _fmt_ext(v) -> str:
    return "∞" if v == INF else str(v)


@dataclass(frozen=True)
class InvariantTuple:
    m: object
    n: object
    k: object
    l: object
    j1: object
    j2: object
    j12: object
    j13: object
    j23: object
    r1: object
    r2: object
    r3: object

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f) for f in FIELD_NAMES)

    @property
    def tuple5(self) -> tuple:
        return (self.n, self.r3, self.r2, self.j1, self.k)

    @property
    def mnk(self) -> tuple:
        return (self.m, self.n, self.k)

    def __str__(self) -> str:
        return "(" + ",".join(_fmt_ext(v) for v in self.as_tuple()) + ")"

    def to_json(self) -> dict:
        return {f: ("inf" if v == INF else v) for f, v in zip(FIELD_NAMES, self.as_tuple())}

    @classmethod
    def from_sequence(cls, values) -> "InvariantTuple":
        values = tuple(values)
        if len(values) != 12:
            raise ValueError("need twelve values")
        return cls(*values)

    def check_chain(self) -> bool:
        """``0 <= n - m <= k <= m <= n`` and the range conditions."""
        if INF in (self.m, self.n, self.k):
            return self.l in (0, 1) and self.r3 in (0, 1, 2, 3)
        return 0 <= self.n - self.m <= self.k <= self.m <= self.n and self.l in (0, 1) and self.r3 in (0, 1, 2, 3)


def _projected_rank(s: Subalgebra, space: CoefficientSpace, comp: str) -> int:
    fns = [getattr(s.combination(v), comp) for v in space.basis]
    return function_rank(fns)


def tuple12(s: Subalgebra) -> InvariantTuple:
    n = s.n
    if n == 0:
        return InvariantTuple(*([0] * 12))
    rank_t = function_rank([q.tau for q in s.basis])
    rank_x = function_rank([q.xi for q in s.basis])
    l = 1 if any(q.eta1 != 0 for q in s.basis) else 0
    s1 = member_subspace(s, {"xi0", "eta1_0"}).dim
    s2 = member_subspace(s, {"tau0", "eta1_0"}).dim
    s12 = member_subspace(s, {"eta1_0"})
    s13 = member_subspace(s, {"xi0"}).dim
    s23 = member_subspace(s, {"tau0"}).dim
    pt = _projected_rank(s, s12, "tau")
    px = _projected_rank(s, s12, "xi")
    if member_subspace(s, {"eta1_1"}).empty:
        r3 = 0
    elif not member_subspace(s, {"eta1_1", "tau0", "xi0"}).empty:
        r3 = 3
    elif not (member_subspace(s, {"eta1_1", "tau0"}).empty and member_subspace(s, {"eta1_1", "xi0"}).empty):
        r3 = 2
    else:
        r3 = 1
    return InvariantTuple(
        m=max(rank_t, rank_x),
        n=n,
        k=min(rank_t, rank_x),
        l=l,
        j1=max(s1, s2),
        j2=min(s1, s2),
        j12=s12.dim,
        j13=max(s13, s23),
        j23=min(s13, s23),
        r1=max(pt, px),
        r2=min(pt, px),
        r3=r3,
    )


def tuple5(s: Subalgebra) -> tuple:
    return tuple12(s).tuple5


# ---------------------------------------------------------------- algebra files


def parse_algebra(text: str, label: str = "") -> Subalgebra:
    """Read an algebra file: one vector-field literal per line.

    ``#`` starts a comment; ``param q = 1/2`` binds a symbolic constant
    for the lines that follow.
    """
    from .expr import ParseError

    params: dict[str, Fraction] = {}
    basis = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("param "):
            body = line[len("param ") :]
            if "=" not in body:
                raise ParseError(f"line {lineno}: expected 'param name = value'", 0)
            name, value = (s.strip() for s in body.split("=", 1))
            if not name.isidentifier():
                raise ParseError(f"line {lineno}: bad parameter name {name!r}", 0)
            e = substitute(parse(value), {k: num(v) for k, v in params.items()})
            if not e.is_number:
                raise ParseError(f"line {lineno}: parameter value must be rational", 0)
            params[name] = e.value
            continue
        try:
            basis.append(parse_vf(line, params))
        except ParseError as err:
            raise ParseError(f"line {lineno}: {err.message}", err.offset) from None
    return Subalgebra(tuple(basis), label, tuple(sorted(params.items())))
