"""The equivalence group of u_tx = f(t, x, u) as executable data.

A group element is stored in the canonical form::

    [swap o] time_map(T) o space_map(X) o shift(U0) o scale_u(C)

(rightmost applied first), i.e. ``t~ = T(t)``, ``x~ = X(x)``,
``u~ = C u + U0(t, x)``, ``f~ = (C f + U0_tx) / (T' X')``, optionally
followed by the exchange ``t~ <-> x~``.  Inverses ``Tinv``/``Xinv`` are
expressions in ``t``/``x`` giving the old variable in terms of the new one;
they are only needed by the closed-form operations.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional

from .expr import (
    ONE,
    ZERO,
    Expr,
    ParseError,
    add,
    diff,
    div,
    free_vars,
    is_zero,
    mul,
    num,
    parse,
    sub,
    substitute,
    var,
)
from .vfield import VectorField, total_derivative

__all__ = [
    "EquivTransform",
    "ProlongedTransform",
    "MissingInverse",
    "identity",
    "time_map",
    "space_map",
    "shift",
    "scale_u",
    "SWAP",
    "act_on_f",
    "verify_map",
    "map_residual",
    "pushforward_vf",
    "compose",
    "prolong1",
    "contact_check",
    "contact_residuals",
    "parse_transform",
    "DiscreteGroup",
    "discrete_group_table",
]

T_, X_, U_ = var("t"), var("x"), var("u")


class MissingInverse(ValueError):
    """A closed-form operation needed an inverse that was not supplied."""


def _as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    return num(value)


def _affine_inverse(e: Expr, v: str) -> Optional[Expr]:
    """Inverse of ``a*v + b`` in the same variable, else None."""
    slope = diff(e, v)
    if not slope.is_number or slope.value == 0:
        return None
    offset = substitute(e, {v: ZERO})
    return div(sub(var(v), offset), slope)


@dataclass(frozen=True)
class EquivTransform:
    T: Expr = T_
    X: Expr = X_
    C: Fraction = Fraction(1)
    U0: Expr = ZERO
    swap: bool = False
    Tinv: Optional[Expr] = None
    Xinv: Optional[Expr] = None
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "T", _as_expr(self.T))
        object.__setattr__(self, "X", _as_expr(self.X))
        object.__setattr__(self, "U0", _as_expr(self.U0))
        object.__setattr__(self, "C", Fraction(self.C))
        if self.Tinv is not None:
            object.__setattr__(self, "Tinv", _as_expr(self.Tinv))
        else:
            object.__setattr__(self, "Tinv", _affine_inverse(self.T, "t"))
        if self.Xinv is not None:
            object.__setattr__(self, "Xinv", _as_expr(self.Xinv))
        else:
            object.__setattr__(self, "Xinv", _affine_inverse(self.X, "x"))
        if self.C == 0:
            raise ValueError("C must be nonzero")
        for name, e, allowed in (("T", self.T, {"t"}), ("X", self.X, {"x"}), ("U0", self.U0, {"t", "x"})):
            extra = free_vars(e) - allowed
            if extra:
                raise ValueError(f"{name} may not depend on {', '.join(sorted(extra))}")
        for name, e, v in (("Tinv", self.Tinv, "t"), ("Xinv", self.Xinv, "x")):
            if e is not None and free_vars(e) - {v}:
                raise ValueError(f"{name} must be an expression in {v}")
        if self.check:
            if is_zero(self.dT) or is_zero(self.dX):
                raise ValueError("T' and X' must not vanish identically")
            if self.Tinv is not None and not is_zero(sub(substitute(self.Tinv, {"t": self.T}), T_)):
                raise ValueError("Tinv is not the inverse of T")
            if self.Xinv is not None and not is_zero(sub(substitute(self.Xinv, {"x": self.X}), X_)):
                raise ValueError("Xinv is not the inverse of X")

    @property
    def dT(self) -> Expr:
        return diff(self.T, "t")

    @property
    def dX(self) -> Expr:
        return diff(self.X, "x")

    @property
    def U(self) -> Expr:
        """New dependent variable in terms of the old ones."""
        return add(mul(self.C, U_), self.U0)

    def new_coordinates(self) -> tuple[Expr, Expr]:
        """``(t~, x~)`` as expressions in the old variables."""
        return (self.X, self.T) if self.swap else (self.T, self.X)

    def literal(self) -> str:
        parts = [f"T={self.T.render()}", f"X={self.X.render()}", f"C={_fmt(self.C)}", f"U0={self.U0.render()}"]
        parts.append(f"swap={'true' if self.swap else 'false'}")
        if self.Tinv is not None:
            parts.append(f"Tinv={self.Tinv.render()}")
        if self.Xinv is not None:
            parts.append(f"Xinv={self.Xinv.render()}")
        return "tr{" + "; ".join(parts) + "}"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def identity() -> EquivTransform:
    return EquivTransform(check=False)


def time_map(T, Tinv=None) -> EquivTransform:
    return EquivTransform(T=T, Tinv=Tinv)


def space_map(X, Xinv=None) -> EquivTransform:
    return EquivTransform(X=X, Xinv=Xinv)


def shift(U0) -> EquivTransform:
    return EquivTransform(U0=U0, check=False)


def scale_u(C) -> EquivTransform:
    return EquivTransform(C=C, check=False)


SWAP = EquivTransform(swap=True, check=False)


def _swap_tx(e: Expr) -> Expr:
    return substitute(e, {"t": X_, "x": T_})


# ---------------------------------------------------------------- action on f


def act_on_f(tr: EquivTransform, f: Expr) -> Expr:
    """Closed-form image ``f~(t, x, u)`` of the arbitrary element ``f``."""
    if tr.Tinv is None or tr.Xinv is None:
        raise MissingInverse("act_on_f needs closed-form inverses of T and X")
    value = div(add(mul(tr.C, f), diff(diff(tr.U0, "t"), "x")), mul(tr.dT, tr.dX))
    old_t, old_x = tr.Tinv, tr.Xinv
    u0_old = substitute(tr.U0, {"t": old_t, "x": old_x})
    old_u = div(sub(U_, u0_old), num(tr.C))
    out = substitute(value, {"t": old_t, "x": old_x, "u": old_u})
    return _swap_tx(out) if tr.swap else out


def map_residual(f: Expr, tr: EquivTransform, f_target: Expr) -> Expr:
    """``f_target(t~, x~, u~) T' X' - C f - U0_tx`` in the old variables."""
    new_t, new_x = tr.new_coordinates()
    pulled = substitute(f_target, {"t": new_t, "x": new_x, "u": tr.U})
    return sub(mul(pulled, tr.dT, tr.dX), add(mul(tr.C, f), diff(diff(tr.U0, "t"), "x")))


def verify_map(f: Expr, tr: EquivTransform, f_target: Expr, trials: int | None = None, **kw) -> bool:
    """Relational check that ``tr`` maps the equation with ``f`` to ``f_target``."""
    return is_zero(map_residual(f, tr, f_target), trials=trials, **kw)


# ---------------------------------------------------------------- vector fields


def _push_scale_u(C: Fraction, q: VectorField) -> VectorField:
    return VectorField(q.tau, q.xi, q.eta1, mul(C, q.eta0))


def _push_shift(U0: Expr, q: VectorField) -> VectorField:
    eta0 = add(q.eta0, mul(q.tau, diff(U0, "t")), mul(q.xi, diff(U0, "x")), mul(-q.eta1, U0))
    return VectorField(q.tau, q.xi, q.eta1, eta0)


def _push_time(T: Expr, Tinv: Optional[Expr], q: VectorField) -> VectorField:
    if T == T_:
        return q
    if Tinv is None:
        raise MissingInverse("pushforward by a time map needs its inverse")
    tau = div(substitute(q.tau, {"t": Tinv}), diff(Tinv, "t"))
    return VectorField(tau, q.xi, q.eta1, substitute(q.eta0, {"t": Tinv}))


def _push_space(X: Expr, Xinv: Optional[Expr], q: VectorField) -> VectorField:
    if X == X_:
        return q
    if Xinv is None:
        raise MissingInverse("pushforward by a space map needs its inverse")
    xi = div(substitute(q.xi, {"x": Xinv}), diff(Xinv, "x"))
    return VectorField(q.tau, xi, q.eta1, substitute(q.eta0, {"x": Xinv}))


def _push_swap(q: VectorField) -> VectorField:
    return VectorField(
        substitute(q.xi, {"x": T_}),
        substitute(q.tau, {"t": X_}),
        q.eta1,
        _swap_tx(q.eta0),
    )


def pushforward_vf(tr: EquivTransform, q: VectorField) -> VectorField:
    """Image of ``q`` under ``tr``, composed from the elementary rules."""
    out = _push_scale_u(tr.C, q)
    out = _push_shift(tr.U0, out)
    out = _push_space(tr.X, tr.Xinv, out)
    out = _push_time(tr.T, tr.Tinv, out)
    if tr.swap:
        out = _push_swap(out)
    return out


# ---------------------------------------------------------------- composition


def _after(outer: Expr, outer_var: str, inner: Expr) -> Expr:
    return substitute(outer, {outer_var: inner})


def compose(a: EquivTransform, b: EquivTransform) -> EquivTransform:
    """Canonical form of ``a o b`` (``b`` applied first)."""
    # coordinates after b, in the original variables
    t1, x1 = b.new_coordinates()
    U0 = add(mul(a.C, b.U0), substitute(a.U0, {"t": t1, "x": x1}))
    C = a.C * b.C
    swap = a.swap != b.swap

    def inv(outer_inv, outer_var, inner_inv, inner_var, result_var):
        if outer_inv is None or inner_inv is None:
            return None
        first = substitute(outer_inv, {outer_var: var(result_var)})
        return substitute(inner_inv, {inner_var: first})

    if not b.swap:
        T_new = _after(a.T, "t", b.T)
        X_new = _after(a.X, "x", b.X)
        Tinv = inv(a.Tinv, "t", b.Tinv, "t", "t")
        Xinv = inv(a.Xinv, "x", b.Xinv, "x", "x")
    else:
        # after b: t1 = Xb(x), x1 = Tb(t)
        T_new = _after(a.X, "x", b.T)
        X_new = _after(a.T, "t", b.X)
        Tinv = inv(a.Xinv, "x", b.Tinv, "t", "t")
        Xinv = inv(a.Tinv, "t", b.Xinv, "x", "x")
    return EquivTransform(T_new, X_new, C, U0, swap, Tinv, Xinv, check=False)


# ---------------------------------------------------------------- prolongation


@dataclass(frozen=True)
class ProlongedTransform:
    base: EquivTransform
    Ut: Expr
    Ux: Expr


def prolong1(tr: EquivTransform) -> ProlongedTransform:
    """First prolongation: ``u~_t~`` and ``u~_x~`` on first-order jets."""
    Ut = div(total_derivative(tr.U, "t"), tr.dT)
    Ux = div(total_derivative(tr.U, "x"), tr.dX)
    if tr.swap:
        Ut, Ux = Ux, Ut
    return ProlongedTransform(tr, Ut, Ux)


def contact_residuals(p: ProlongedTransform) -> tuple[Expr, Expr]:
    new_t, new_x = p.base.new_coordinates()
    out = []
    for along in ("t", "x"):
        r = add(
            mul(p.Ut, total_derivative(new_t, along)),
            mul(p.Ux, total_derivative(new_x, along)),
            mul(-1, total_derivative(p.base.U, along)),
        )
        out.append(r)
    return tuple(out)


def contact_check(p: ProlongedTransform, trials: int | None = None, **kw) -> bool:
    """Both contact residuals vanish identically on first-order jets."""
    return all(is_zero(r, trials=trials, **kw) for r in contact_residuals(p))


# ---------------------------------------------------------------- literal


def parse_transform(text: str) -> EquivTransform:
    """Parse ``tr{T=..; X=..; C=..; U0=..; swap=..; Tinv=..; Xinv=..}``."""
    m = re.fullmatch(r"\s*tr\{(.*)\}\s*", text, re.S)
    if not m:
        raise ParseError("expected tr{...}", 0)
    body_offset = text.index("{") + 1
    values: dict = {}
    pos = 0
    for item in m.group(1).split(";"):
        offset = body_offset + pos
        pos += len(item) + 1
        if not item.strip():
            continue
        if "=" not in item:
            raise ParseError("expected name=value", offset)
        key, value = (s.strip() for s in item.split("=", 1))
        if key == "swap":
            if value.lower() not in ("true", "false", "0", "1"):
                raise ParseError("swap must be true or false", offset)
            values["swap"] = value.lower() in ("true", "1")
        elif key == "C":
            c = parse(value)
            if not c.is_number:
                raise ParseError("C must be a rational constant", offset)
            values["C"] = c.value
        elif key in ("T", "X", "U0", "Tinv", "Xinv"):
            try:
                values[key] = parse(value)
            except ParseError as err:
                raise ParseError(err.message, offset + item.index("=") + 1 + err.offset) from None
        else:
            raise ParseError(f"unknown field {key!r}", offset)
    try:
        return EquivTransform(**values)
    except ValueError as err:
        raise ParseError(str(err), 0) from None


# ---------------------------------------------------------------- discrete part


_Matrix = tuple


def _matmul(a: _Matrix, b: _Matrix) -> _Matrix:
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3))


_ID = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
DISCRETE_GENERATORS = {
    "I0": ((0, 1, 0), (1, 0, 0), (0, 0, 1)),
    "It": ((-1, 0, 0), (0, 1, 0), (0, 0, 1)),
    "Ix": ((1, 0, 0), (0, -1, 0), (0, 0, 1)),
    "Iu": ((1, 0, 0), (0, 1, 0), (0, 0, -1)),
}


@dataclass(frozen=True)
class DiscreteGroup:
    elements: tuple
    table: tuple
    orders: tuple
    center: tuple
    certificate: dict

    @property
    def order(self) -> int:
        return len(self.elements)

    def order_histogram(self) -> dict:
        return dict(sorted(Counter(self.orders).items()))


def _closure(gens) -> list:
    seen = {_ID}
    frontier = [_ID]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                p = _matmul(g, h)
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
        frontier = nxt
    return sorted(seen)


def _element_order(g) -> int:
    n, p = 1, g
    while p != _ID:
        p = _matmul(p, g)
        n += 1
    return n


def discrete_group_table() -> DiscreteGroup:
    """Group generated by the swap and the three sign changes, as signed
    permutation matrices acting on (t, x, u), with a D4 x Z2 certificate."""
    elements = _closure(list(DISCRETE_GENERATORS.values()))
    index = {g: i for i, g in enumerate(elements)}
    table = tuple(tuple(index[_matmul(a, b)] for b in elements) for a in elements)
    orders = tuple(_element_order(g) for g in elements)
    center = tuple(i for i, g in enumerate(elements) if all(_matmul(g, h) == _matmul(h, g) for h in elements))
    certificate = {}
    inverse = {g: next(h for h in elements if _matmul(g, h) == _ID) for g in elements}
    for r, s, z in product(elements, repeat=3):
        if _element_order(r) != 4 or _element_order(s) != 2 or _element_order(z) != 2:
            continue
        if index[z] not in center:
            continue
        if _matmul(_matmul(s, r), s) != inverse[r]:
            continue
        dihedral = _closure([r, s])
        if len(dihedral) != 8 or z in dihedral:
            continue
        if len(_closure([r, s, z])) != len(elements):
            continue
        certificate = {"r": index[r], "s": index[s], "z": index[z]}
        break
    return DiscreteGroup(tuple(elements), table, orders, center, certificate)
