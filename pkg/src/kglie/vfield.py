"""Vector fields of the form tau(t) d_t + xi(x) d_x + (eta1*u + eta0(t, x)) d_u.

Every Lie symmetry of an equation u_tx = f(t, x, u) with f_uu != 0 has this
shape, so the coefficient ``eta1`` is a plain rational and the rest are
expressions in one or two variables.  The module also hosts the text
syntax for such fields and total derivatives on the second-order jet space.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .expr import (
    ZERO,
    Expr,
    Parser,
    ParseError,
    add,
    diff,
    format_rational,
    free_vars,
    is_zero,
    mul,
    num,
    parse,
    substitute,
    sub,
    var,
)

__all__ = [
    "VectorField",
    "Dt",
    "Dx",
    "I",
    "Z",
    "bracket",
    "proj_t",
    "proj_x",
    "proj_I",
    "proj_Z",
    "JET_VARS",
    "total_derivative",
    "parse_vf",
    "combine",
]

JET_VARS = ("t", "x", "u", "u_t", "u_x", "u_tt", "u_tx", "u_xx")
_SECOND_ORDER = ("u_tt", "u_tx", "u_xx")


def _expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    return num(value)


def _check_vars(e: Expr, allowed: set, component: str):
    extra = free_vars(e) - allowed
    if extra:
        raise ValueError(f"{component} may not depend on {', '.join(sorted(extra))}: {e.render()}")


@dataclass(frozen=True)
class VectorField:
    tau: Expr = ZERO
    xi: Expr = ZERO
    eta1: Fraction = Fraction(0)
    eta0: Expr = ZERO

    def __post_init__(self):
        object.__setattr__(self, "tau", _expr(self.tau))
        object.__setattr__(self, "xi", _expr(self.xi))
        object.__setattr__(self, "eta0", _expr(self.eta0))
        object.__setattr__(self, "eta1", Fraction(self.eta1))
        _check_vars(self.tau, {"t"}, "tau")
        _check_vars(self.xi, {"x"}, "xi")
        _check_vars(self.eta0, {"t", "x"}, "eta0")

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(
            add(self.tau, other.tau),
            add(self.xi, other.xi),
            self.eta1 + other.eta1,
            add(self.eta0, other.eta0),
        )

    def __neg__(self) -> "VectorField":
        return self.scale(-1)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __rmul__(self, scalar) -> "VectorField":
        return self.scale(scalar)

    def scale(self, scalar) -> "VectorField":
        c = Fraction(scalar)
        return VectorField(mul(c, self.tau), mul(c, self.xi), c * self.eta1, mul(c, self.eta0))

    def components(self) -> tuple:
        return (self.tau, self.xi, num(self.eta1), self.eta0)

    def is_zero(self, **kw) -> bool:
        """Componentwise zero test (exact on ``eta1``)."""
        return self.eta1 == 0 and all(is_zero(c, **kw) for c in (self.tau, self.xi, self.eta0))

    def equals(self, other: "VectorField", **kw) -> bool:
        return (self - other).is_zero(**kw)

    def literal(self) -> str:
        """Full ``vf{...}`` literal."""
        return (
            f"vf{{tau={self.tau.render()}; xi={self.xi.render()}; "
            f"eta1={format_rational(self.eta1)}; eta0={self.eta0.render()}}}"
        )

    def __str__(self) -> str:
        parts = []
        for name, comp in (("Dt", self.tau), ("Dx", self.xi)):
            if comp != ZERO:
                parts.append(f"{name}({comp.render()})")
        if self.eta1 == 1:
            parts.append("I")
        elif self.eta1 == -1:
            parts.append("-I")
        elif self.eta1:
            parts.append(f"{format_rational(self.eta1)}*I")
        if self.eta0 != ZERO:
            parts.append(f"Z({self.eta0.render()})")
        if not parts:
            return "0"
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text

    def apply(self, e: Expr) -> Expr:
        """Act on a function of (t, x, u) as a derivation."""
        eta = add(mul(self.eta1, var("u")), self.eta0)
        return add(mul(self.tau, diff(e, "t")), mul(self.xi, diff(e, "x")), mul(eta, diff(e, "u")))


def Dt(tau) -> VectorField:
    return VectorField(tau=_expr(tau))


def Dx(xi) -> VectorField:
    return VectorField(xi=_expr(xi))


I = VectorField(eta1=Fraction(1))


def Z(eta0) -> VectorField:
    return VectorField(eta0=_expr(eta0))


def combine(coeffs, fields) -> VectorField:
    """Rational linear combination ``sum(c * Q)``."""
    out = VectorField()
    for c, q in zip(coeffs, fields):
        if c:
            out = out + q.scale(c)
    return out


def bracket(q1: VectorField, q2: VectorField) -> VectorField:
    """Lie bracket; the ``eta1`` component of a bracket always vanishes."""
    tau = sub(mul(q1.tau, diff(q2.tau, "t")), mul(q2.tau, diff(q1.tau, "t")))
    xi = sub(mul(q1.xi, diff(q2.xi, "x")), mul(q2.xi, diff(q1.xi, "x")))
    eta0 = add(
        mul(q1.tau, diff(q2.eta0, "t")),
        mul(q1.xi, diff(q2.eta0, "x")),
        mul(-1, q2.tau, diff(q1.eta0, "t")),
        mul(-1, q2.xi, diff(q1.eta0, "x")),
        mul(q2.eta1, q1.eta0),
        mul(-q1.eta1, q2.eta0),
    )
    return VectorField(tau, xi, Fraction(0), eta0)


def proj_t(q: VectorField) -> Expr:
    return q.tau


def proj_x(q: VectorField) -> Expr:
    return q.xi


def proj_I(q: VectorField) -> Fraction:
    return q.eta1


def proj_Z(q: VectorField) -> Expr:
    return q.eta0


def total_derivative(e: Expr, along: str, truncated: bool = False) -> Expr:
    """Total derivative D_t or D_x on second-order jets.

    The truncated operator is ``d_t + u_t d_u`` (resp. ``d_x + u_x d_u``).
    The full operator additionally differentiates through ``u_t``, ``u_x``
    and refuses inputs that already depend on second-order jets.
    """
    if along not in ("t", "x"):
        raise ValueError("along must be 't' or 'x'")
    out = add(diff(e, along), mul(var("u_" + along), diff(e, "u")))
    if truncated:
        return out
    present = free_vars(e) & set(_SECOND_ORDER)
    if present:
        raise ValueError(
            "full total derivative would need third-order jets: " + ", ".join(sorted(present))
        )
    second = {"t": ("u_tt", "u_tx"), "x": ("u_tx", "u_xx")}[along]
    return add(out, mul(var(second[0]), diff(e, "u_t")), mul(var(second[1]), diff(e, "u_x")))


# ---------------------------------------------------------------- literals

_GENERATOR = re.compile(r"(vf\{|Dt\(|Dx\(|Z\(|I\b)")


def _split_top(text: str, seps: str) -> list[tuple[str, int]]:
    """Split on characters in ``seps`` at bracket depth 0, keeping offsets."""
    parts = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        elif ch in seps and depth == 0:
            parts.append((text[start:i], start))
            start = i + 1
    parts.append((text[start:], start))
    return parts


def _scalar(text: str, params: Mapping[str, Fraction], offset: int) -> Fraction:
    text = text.strip()
    if text.endswith("*"):
        text = text[:-1]
    if not text.strip():
        return Fraction(1)
    if text.strip() == "-":
        return Fraction(-1)
    try:
        e = substitute(parse(text), {k: num(v) for k, v in params.items()})
    except ParseError as err:
        raise ParseError(err.message, offset + err.offset) from None
    if not e.is_number:
        raise ParseError(f"scalar {text!r} is not a rational constant", offset)
    return e.value


def _component(text: str, params, offset: int, parser: Parser) -> Expr:
    try:
        e = parser.parse(text)
    except ParseError as err:
        raise ParseError(err.message, offset + err.offset) from None
    if params:
        e = substitute(e, {k: num(v) for k, v in params.items()})
    return e


def _vf_body(body: str, params, offset: int, parser: Parser) -> VectorField:
    fields = {}
    for item, pos in _split_top(body, ";"):
        if not item.strip():
            continue
        if "=" not in item:
            raise ParseError("expected name=value in vf literal", offset + pos)
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in ("tau", "xi", "eta1", "eta0"):
            raise ParseError(f"unknown vf component {key!r}", offset + pos)
        vpos = offset + pos + item.index("=") + 1
        fields[key] = _component(value, params, vpos, parser)
    eta1 = fields.pop("eta1", ZERO)
    if not eta1.is_number:
        raise ParseError("eta1 must be a rational constant", offset)
    try:
        return VectorField(eta1=eta1.value, **fields)
    except ValueError as err:
        raise ParseError(str(err), offset) from None


def parse_vf(text: str, params: Mapping[str, Fraction] | None = None) -> VectorField:
    """Parse a vector-field literal or a sum of shorthand generators.

    Examples: ``vf{tau=t; xi=x; eta1=-1; eta0=0}``, ``Dt(t) + Z(-x)``,
    ``2*Dt(1) - 1/2*I``.  ``params`` binds symbolic constants such as ``q``.
    """
    params = {k: Fraction(v) for k, v in (params or {}).items()}
    parser = Parser()
    total = VectorField()
    # split into signed terms at depth 0
    terms = []
    depth = 0
    start = 0
    sign_positions = []
    for i, ch in enumerate(text):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced bracket", i)
        elif ch in "+-" and depth == 0:
            prev = text[:i].rstrip()
            if prev and prev[-1] not in "*/^(":
                sign_positions.append(i)
    if depth != 0:
        raise ParseError("unbalanced bracket", len(text))
    cuts = [0] + sign_positions + [len(text)]
    for a, b in zip(cuts, cuts[1:]):
        chunk = text[a:b]
        if chunk.strip():
            terms.append((chunk, a))
    if not terms:
        raise ParseError("empty vector field", 0)
    for chunk, pos in terms:
        m = None
        for cand in _GENERATOR.finditer(chunk):
            m = cand
            break
        if m is None:
            raise ParseError("expected a generator Dt(), Dx(), I, Z() or vf{}", pos + len(chunk))
        prefix = chunk[: m.start()]
        stripped = prefix.strip()
        if stripped.startswith("+"):
            stripped = stripped[1:]
        scalar = _scalar(stripped, params, pos)
        head = m.group(1)
        body_start = m.end()
        if head == "I":
            field = I
            tail = chunk[body_start:]
        else:
            close = "}" if head == "vf{" else ")"
            depth = 1
            j = body_start
            while j < len(chunk) and depth:
                if chunk[j] in "({":
                    depth += 1
                elif chunk[j] in ")}":
                    depth -= 1
                j += 1
            if depth or chunk[j - 1] != close:
                raise ParseError("unterminated generator", pos + len(chunk))
            body = chunk[body_start : j - 1]
            tail = chunk[j:]
            if head == "vf{":
                field = _vf_body(body, params, pos + body_start, parser)
            else:
                e = _component(body, params, pos + body_start, parser)
                try:
                    field = {"Dt(": Dt, "Dx(": Dx, "Z(": Z}[head](e)
                except ValueError as err:
                    raise ParseError(str(err), pos + body_start) from None
        if tail.strip():
            raise ParseError(f"unexpected {tail.strip()!r}", pos + len(chunk) - len(tail.lstrip()))
        total = total + field.scale(scalar)
    return total
