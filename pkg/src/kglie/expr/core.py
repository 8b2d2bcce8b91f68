"""Expression nodes and canonical-light normalization.

Expressions are immutable trees.  All construction goes through the smart
constructors (:func:`num`, :func:`add`, :func:`mul`, :func:`power`,
:func:`fn`, :func:`afn`), which flatten sums and products, sort arguments
by a fixed total order, collect like terms and fold constant arithmetic.
The result is not a unique normal form, only a cheap and stable one.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

__all__ = [
    "Expr",
    "ELEMENTARY",
    "num",
    "var",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "power",
    "fn",
    "afn",
    "diff",
    "substitute",
    "free_vars",
    "has_abstract",
    "is_rational_expr",
    "abstract_names",
    "instantiate",
    "normalize",
    "ZERO",
    "ONE",
]

NUM, VAR, ADD, MUL, POW, FN, AFN = range(7)

ELEMENTARY = ("exp", "ln", "sin", "cos", "tan", "cot", "sinh", "cosh", "abs", "atan")


class Expr:
    """A node of an expression tree.

    ``kind`` is one of the module-level tags, ``data`` holds the payload
    (a Fraction for numbers, a name for variables and functions, a
    ``(name, multi_index)`` pair for abstract functions) and ``args`` the
    child nodes.  Instances should be built with the smart constructors.
    """

    __slots__ = ("kind", "data", "args", "_key", "_hash", "_text")

    def __init__(self, kind: int, data, args: tuple = ()):
        self.kind = kind
        self.data = data
        self.args = args
        self._key = None
        self._hash = None
        self._text = None

    @property
    def key(self) -> tuple:
        """Total-order key; structural equality is key equality."""
        k = self._key
        if k is None:
            if self.kind == NUM:
                k = (NUM, self.data)
            elif self.kind == VAR:
                k = (VAR, self.data)
            else:
                k = (self.kind, self.data, tuple(a.key for a in self.args))
            self._key = k
        return k

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self.kind == other.kind and hash(self) == hash(other) and self.key == other.key

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash(self.key)
        return h

    def __lt__(self, other: "Expr") -> bool:
        return self.key < other.key

    def __repr__(self):
        return f"Expr({self.render()!r})"

    def __str__(self):
        return self.render()

    def render(self) -> str:
        if self._text is None:
            from .render import render

            self._text = render(self)
        return self._text

    # arithmetic sugar so that tests and catalog code stay readable
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, other):
        return power(self, _coerce(other))

    @property
    def is_number(self) -> bool:
        return self.kind == NUM

    @property
    def value(self) -> Fraction:
        if self.kind != NUM:
            raise TypeError(f"{self.render()} is not a number")
        return self.data


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return num(value)
    raise TypeError(f"cannot use {value!r} in an expression")


# ---------------------------------------------------------------- atoms


@lru_cache(maxsize=4096)
def _num_cached(value: Fraction) -> Expr:
    return Expr(NUM, value)


def num(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return _num_cached(Fraction(value))


ZERO = num(0)
ONE = num(1)
MINUS_ONE = num(-1)


@lru_cache(maxsize=1024)
def var(name: str) -> Expr:
    return Expr(VAR, name)


# ---------------------------------------------------------------- sums


def _split_coeff(term: Expr) -> tuple[Fraction, Expr]:
    """Split ``3*x*y`` into ``(3, x*y)``."""
    if term.kind == MUL and term.args[0].kind == NUM:
        rest = term.args[1:]
        core = rest[0] if len(rest) == 1 else Expr(MUL, None, rest)
        return term.args[0].data, core
    return Fraction(1), term


def _scaled(coeff: Fraction, core: Expr) -> Expr:
    if coeff == 1:
        return core
    if core.kind == MUL:
        return Expr(MUL, None, (num(coeff),) + core.args)
    return Expr(MUL, None, (num(coeff), core))


def add(*terms) -> Expr:
    constant = Fraction(0)
    collected: dict[Expr, Fraction] = {}
    stack = [_coerce(t) for t in terms]
    flat = []
    while stack:
        t = stack.pop()
        if t.kind == ADD:
            stack.extend(t.args)
        else:
            flat.append(t)
    for t in flat:
        if t.kind == NUM:
            constant += t.data
            continue
        c, core = _split_coeff(t)
        collected[core] = collected.get(core, Fraction(0)) + c
    out = [_scaled(c, core) for core, c in collected.items() if c != 0]
    out.sort(key=lambda e: e.key)
    if constant != 0:
        out.insert(0, num(constant))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Expr(ADD, None, tuple(out))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(a, neg(_coerce(b)))


# ---------------------------------------------------------------- products


def _base_exp(f: Expr) -> tuple[Expr, Expr]:
    if f.kind == POW:
        return f.args[0], f.args[1]
    return f, ONE


def mul(*factors) -> Expr:
    coeff = Fraction(1)
    stack = [_coerce(f) for f in factors]
    flat = []
    while stack:
        f = stack.pop()
        if f.kind == MUL:
            stack.extend(f.args)
        elif f.kind == NUM:
            coeff *= f.data
        else:
            flat.append(f)
    if coeff == 0:
        return ZERO
    exponents: dict[Expr, list[Expr]] = {}
    for f in flat:
        b, e = _base_exp(f)
        exponents.setdefault(b, []).append(e)
    out = []
    regroup = []
    for b, es in exponents.items():
        p = power(b, add(*es)) if len(es) > 1 else (b if es[0] is ONE else power(b, es[0]))
        if p.kind == NUM:
            coeff *= p.data
        elif p.kind == MUL:
            regroup.append(p)
        else:
            out.append(p)
    if regroup:
        return mul(num(coeff), *out, *regroup)
    if coeff == 0:
        return ZERO
    if not out:
        return num(coeff)
    if len(out) == 1 and out[0].kind == ADD and coeff != 1:
        return add(*(mul(num(coeff), t) for t in out[0].args))
    out.sort(key=lambda e: e.key)
    if len(out) == 1 and coeff == 1:
        return out[0]
    if coeff != 1:
        out.insert(0, num(coeff))
    return Expr(MUL, None, tuple(out))


def div(a, b) -> Expr:
    return mul(a, power(_coerce(b), MINUS_ONE))


def _is_int(e: Expr) -> bool:
    return e.kind == NUM and e.data.denominator == 1


def _rational_power(base: Fraction, exponent: Fraction) -> Fraction | None:
    """Exact value of ``base**exponent`` when it is rational, else None."""
    if exponent.denominator == 1:
        if base == 0 and exponent < 0:
            return None
        return base ** int(exponent)
    if base <= 0:
        return None
    root = exponent.denominator
    out = []
    for part in (base.numerator, base.denominator):
        r = round(part ** (1.0 / root))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**root == part:
                out.append(cand)
                break
        else:
            return None
    return Fraction(out[0], out[1]) ** exponent.numerator


def power(base, exponent) -> Expr:
    b = _coerce(base)
    e = _coerce(exponent)
    if e.kind == NUM:
        if e.data == 0:
            return ONE
        if e.data == 1:
            return b
        if b.kind == NUM:
            folded = _rational_power(b.data, e.data)
            if folded is not None:
                return num(folded)
        if _is_int(e):
            if b.kind == POW and b.args[1].kind == NUM:
                return power(b.args[0], num(b.args[1].data * e.data))
            if b.kind == MUL:
                return mul(*(power(f, e) for f in b.args))
        if b.kind == FN and b.data == "exp":
            return fn("exp", mul(e, b.args[0]))
    if b.kind == NUM and b.data == 1:
        return ONE
    return Expr(POW, None, (b, e))


# ---------------------------------------------------------------- functions


def fn(name: str, arg) -> Expr:
    if name not in ELEMENTARY:
        raise ValueError(f"unknown function {name!r}")
    a = _coerce(arg)
    if a.kind == NUM:
        v = a.data
        if v == 0 and name in ("sin", "tan", "sinh", "atan"):
            return ZERO
        if v == 0 and name in ("exp", "cos", "cosh"):
            return ONE
        if v == 1 and name == "ln":
            return ZERO
        if name == "abs":
            return num(abs(v))
    if name == "ln" and a.kind == FN and a.data == "exp":
        return a.args[0]
    if name == "exp" and a.kind == FN and a.data == "ln":
        return a.args[0]
    if name == "abs" and a.kind == FN and a.data in ("abs", "exp", "cosh"):
        return a
    return Expr(FN, name, (a,))


def afn(name: str, args: Iterable, derivs: Iterable[int] | None = None) -> Expr:
    args = tuple(_coerce(a) for a in args)
    derivs = tuple(derivs) if derivs is not None else (0,) * len(args)
    if len(derivs) != len(args):
        raise ValueError("multi-index length must equal argument count")
    if any(d < 0 for d in derivs):
        raise ValueError("multi-index entries must be non-negative")
    return Expr(AFN, (name, derivs), args)


# ---------------------------------------------------------------- queries


@lru_cache(maxsize=65536)
def free_vars(e: Expr) -> frozenset:
    if e.kind == VAR:
        return frozenset((e.data,))
    if e.kind == NUM:
        return frozenset()
    out = frozenset()
    for a in e.args:
        out |= free_vars(a)
    return out


@lru_cache(maxsize=65536)
def has_abstract(e: Expr) -> bool:
    if e.kind == AFN:
        return True
    return any(has_abstract(a) for a in e.args)


def abstract_names(e: Expr) -> set[str]:
    if e.kind == AFN:
        out = {e.data[0]}
    else:
        out = set()
    for a in e.args:
        out |= abstract_names(a)
    return out


@lru_cache(maxsize=65536)
def is_rational_expr(e: Expr) -> bool:
    """True for oracle-free expressions built from + * and integer powers."""
    if e.kind in (NUM, VAR):
        return True
    if e.kind in (ADD, MUL):
        return all(is_rational_expr(a) for a in e.args)
    if e.kind == POW:
        return _is_int(e.args[1]) and is_rational_expr(e.args[0])
    return False


def normalize(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the smart constructors."""
    return substitute(e, {})


# ---------------------------------------------------------------- calculus


def _fn_derivative(name: str, a: Expr) -> Expr:
    if name == "exp":
        return fn("exp", a)
    if name == "ln":
        return power(a, MINUS_ONE)
    if name == "sin":
        return fn("cos", a)
    if name == "cos":
        return neg(fn("sin", a))
    if name == "tan":
        return power(fn("cos", a), num(-2))
    if name == "cot":
        return neg(power(fn("sin", a), num(-2)))
    if name == "sinh":
        return fn("cosh", a)
    if name == "cosh":
        return fn("sinh", a)
    if name == "abs":
        return mul(a, power(fn("abs", a), MINUS_ONE))
    if name == "atan":
        return power(add(ONE, power(a, num(2))), MINUS_ONE)
    raise ValueError(name)


@lru_cache(maxsize=200000)
def diff(e: Expr, v: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``v``."""
    if v not in free_vars(e):
        return ZERO
    k = e.kind
    if k == VAR:
        return ONE
    if k == ADD:
        return add(*(diff(a, v) for a in e.args))
    if k == MUL:
        terms = []
        for i, a in enumerate(e.args):
            da = diff(a, v)
            if da is ZERO or (da.kind == NUM and da.data == 0):
                continue
            terms.append(mul(*e.args[:i], da, *e.args[i + 1 :]))
        return add(*terms)
    if k == POW:
        b, p = e.args
        db = diff(b, v)
        if v not in free_vars(p):
            return mul(p, power(b, sub(p, ONE)), db)
        dp = diff(p, v)
        return mul(e, add(mul(dp, fn("ln", b)), mul(p, db, power(b, MINUS_ONE))))
    if k == FN:
        a = e.args[0]
        return mul(_fn_derivative(e.data, a), diff(a, v))
    if k == AFN:
        name, derivs = e.data
        terms = []
        for i, a in enumerate(e.args):
            da = diff(a, v)
            if da.kind == NUM and da.data == 0:
                continue
            bumped = derivs[:i] + (derivs[i] + 1,) + derivs[i + 1 :]
            terms.append(mul(Expr(AFN, (name, bumped), e.args), da))
        return add(*terms)
    raise AssertionError(k)


def _rebuild(e: Expr, args: tuple) -> Expr:
    k = e.kind
    if k == ADD:
        return add(*args)
    if k == MUL:
        return mul(*args)
    if k == POW:
        return power(*args)
    if k == FN:
        return fn(e.data, args[0])
    if k == AFN:
        return afn(e.data[0], args, e.data[1])
    raise AssertionError(k)


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    """Simultaneous substitution of variables, followed by normalization."""
    bindings = {k: _coerce(v) for k, v in bindings.items()}
    memo: dict[Expr, Expr] = {}

    def walk(node: Expr) -> Expr:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if node.kind == VAR:
            out = bindings.get(node.data, node)
        elif node.kind == NUM:
            out = node
        else:
            out = _rebuild(node, tuple(walk(a) for a in node.args))
        memo[node] = out
        return out

    return walk(e)


def instantiate(e: Expr, name: str, params: tuple[str, ...], body: Expr) -> Expr:
    """Replace abstract function ``name`` by a concrete ``body`` in ``params``.

    Derivative markers are honoured by differentiating ``body`` before
    substituting the call arguments.
    """
    memo: dict[Expr, Expr] = {}

    def walk(node: Expr) -> Expr:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if node.kind in (NUM, VAR):
            out = node
        else:
            args = tuple(walk(a) for a in node.args)
            if node.kind == AFN and node.data[0] == name:
                d = body
                for p, order in zip(params, node.data[1]):
                    for _ in range(order):
                        d = diff(d, p)
                out = substitute(d, dict(zip(params, args)))
            else:
                out = _rebuild(node, args)
        memo[node] = out
        return out

    return walk(e)
