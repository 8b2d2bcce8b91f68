"""Classifying equation, symmetry checks and template-equation detection.

For ``f = alpha(t, x) * Fhat(omega)`` with ``omega = beta(t, x) u`` a further
symmetry exists exactly when ``Fhat`` satisfies a constant-coefficient
template ``(a w + b) Fhat' + c Fhat - d = 0``.  :func:`detect_template`
finds the space of such ``(a, b, c, d)`` numerically and certifies it
symbolically; :func:`classify_extension` applies the case constraints.
The functional extension equations for the one-dimensional cases are
verified (not solved) by :func:`verify_extension_eq`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath

from .expr import (
    ZERO,
    Domain,
    Expr,
    SamplingExhausted,
    add,
    current,
    diff,
    evaluate,
    fn,
    format_rational,
    free_vars,
    has_abstract,
    is_zero,
    mul,
    num,
    parse,
    sample_points,
    sub,
    substitute,
    var,
)
from .vfield import VectorField

__all__ = [
    "classifying_residual",
    "is_symmetry",
    "TemplateSolution",
    "TemplateError",
    "detect_template",
    "classify_extension",
    "ExtensionParams",
    "extension_residual",
    "verify_extension_eq",
    "extension_field",
    "lift_fhat",
]

OMEGA = "w"


def classifying_residual(f: Expr, q: VectorField) -> Expr:
    """``tau f_t + xi f_x + (eta1 u + eta0) f_u - (eta1 - tau' - xi') f - eta0_tx``."""
    eta = add(mul(q.eta1, var("u")), q.eta0)
    divergence = sub(num(q.eta1), add(diff(q.tau, "t"), diff(q.xi, "x")))
    return add(
        mul(q.tau, diff(f, "t")),
        mul(q.xi, diff(f, "x")),
        mul(eta, diff(f, "u")),
        mul(-1, divergence, f),
        mul(-1, diff(diff(q.eta0, "t"), "x")),
    )


def is_symmetry(f: Expr, q: VectorField, trials: int | None = None, **kw) -> bool:
    return is_zero(classifying_residual(f, q), trials=trials, **kw)


# ---------------------------------------------------------------- templates


class TemplateError(ValueError):
    """Template detection could not be carried out."""


@dataclass(frozen=True)
class TemplateSolution:
    """Basis of the (a, b, c, d) vectors of template equations met by Fhat."""

    basis: tuple
    exact: bool
    flags: tuple = ()

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_json(self) -> list:
        if self.exact:
            return [[format_rational(c) for c in v] for v in self.basis]
        return [[float(c) for c in v] for v in self.basis]


def _template_flags(v) -> dict:
    a, b, c, d = v
    if a != 0:
        nondegenerate = c != -a
    else:
        nondegenerate = c != 0
    return {"ab_nonzero": a != 0 or b != 0, "nondegenerate": nondegenerate}


def _rref(rows, tol):
    """Reduced row echelon form of a list of mpmath rows."""
    m = [list(r) for r in rows]
    ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(ncols):
        best = max(range(r, len(m)), key=lambda i: abs(m[i][c]), default=None)
        if best is None or abs(m[best][c]) <= tol:
            continue
        m[r], m[best] = m[best], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [x - factor * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    if not man:
        return Fraction(0)
    value = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -value if sign else value


def _rationalize(x, max_den=10**6, tol=Fraction(1, 10**40)) -> Optional[Fraction]:
    """Nearest small-denominator rational, or None if none is close enough."""
    exact = _mpf_to_fraction(x)
    approx = exact.limit_denominator(max_den)
    if abs(exact - approx) > tol:
        return None
    return approx


def _null_basis(fhat: Expr, points, seed: int):
    d1 = diff(fhat, OMEGA)
    rows = []
    with mpmath.workprec(current().precision):
        for i, p in enumerate(points):
            w = mpmath.mpf(p[OMEGA].numerator) / p[OMEGA].denominator
            vf, _ = evaluate(fhat, p, seed=seed, sample=i)
            vd, _ = evaluate(d1, p, seed=seed, sample=i)
            rows.append([w * vd, vd, vf, mpmath.mpf(-1)])
        A = mpmath.matrix(rows)
        U, S, V = mpmath.svd_r(A)
        smax = max(abs(S[i]) for i in range(len(S)))
        rank = sum(1 for i in range(len(S)) if abs(S[i]) > mpmath.mpf("1e-9") * smax)
        null = [[V[i, j] for j in range(4)] for i in range(rank, 4)]
    return null


def detect_template(fhat: Expr, sample_count: int = 8, seed: int = 0, domain: Domain | None = None) -> TemplateSolution:
    """Space of template equations ``(a w + b) Fhat' + c Fhat - d = 0``.

    ``fhat`` must be a concrete expression in ``w``.
    """
    if sample_count < 6:
        raise TemplateError("sample_count must be at least 6")
    if has_abstract(fhat):
        raise TemplateError("Fhat must be concrete")
    if free_vars(fhat) - {OMEGA}:
        raise TemplateError("Fhat must be an expression in w only")
    if is_zero(diff(diff(fhat, OMEGA), OMEGA), seed=seed):
        raise TemplateError("Fhat'' vanishes identically")
    domain = domain or Domain(separations=())
    dims = []
    for attempt in range(4):
        pts_a = sample_points([OMEGA], sample_count, seed, f"template|{attempt}|a", domain)
        pts_b = sample_points([OMEGA], sample_count, seed, f"template|{attempt}|b", domain)
        null_a = _null_basis(fhat, pts_a, seed)
        null_b = _null_basis(fhat, pts_b, seed)
        dims.append((len(null_a), len(null_b)))
        if len(null_a) == len(null_b):
            break
    else:
        raise TemplateError(f"unstable rank across re-samples: {dims}")
    if not null_a:
        return TemplateSolution((), True, ())
    with mpmath.workprec(current().precision):
        reduced, pivots = _rref(null_a, mpmath.mpf(10) ** -30)
        rationalized = [[_rationalize(x) for x in row] for row in reduced]
    exact_basis = []
    for vec in rationalized:
        if any(v is None for v in vec):
            exact_basis = None
            break
        exact_basis.append(tuple(vec))
    if exact_basis is not None:
        d1 = diff(fhat, OMEGA)
        w = var(OMEGA)
        for a, b, c, d in exact_basis:
            resid = add(mul(add(mul(a, w), b), d1), mul(c, fhat), num(-d))
            if not is_zero(resid, seed=seed, domain=domain):
                exact_basis = None
                break
    if exact_basis is None:
        basis = tuple(tuple(float(x) for x in row) for row in reduced)
        return TemplateSolution(basis, False, tuple(_template_flags(v) for v in basis))
    return TemplateSolution(tuple(exact_basis), True, tuple(_template_flags(v) for v in exact_basis))


_CONSTRAINTS = {
    5: "ad=0",
    6: "ad=bc",
    7: "c=-(1+2/q)a, d=-(q+1)(q+2)b",
    8: "d=0",
    9: "d=0",
}


def _meets(case_id: int, v, q) -> bool:
    a, b, c, d = v
    if case_id == 5:
        return a * d == 0
    if case_id == 6:
        return a * d == b * c
    if case_id == 7:
        q = Fraction(q)
        return c == -(1 + 2 / q) * a and d == -(q + 1) * (q + 2) * b
    if case_id in (8, 9):
        return d == 0
    raise ValueError(f"extension detection covers cases 5-9, not {case_id}")


def _close(x, y, tol=1e-7) -> bool:
    return abs(float(x) - float(y)) <= tol * (1 + abs(float(x)) + abs(float(y)))


def _meets_float(case_id: int, v, q) -> bool:
    a, b, c, d = v
    if case_id == 5:
        return _close(a * d, 0)
    if case_id == 6:
        return _close(a * d, b * c)
    if case_id == 7:
        q = float(q)
        return _close(c, -(1 + 2 / q) * a) and _close(d, -(q + 1) * (q + 2) * b)
    return _close(d, 0)


def _a_branch_target(case_id: int, a_nonzero: bool) -> Optional[str]:
    if a_nonzero:
        return "12"
    return {5: "11", 8: "11", 9: "13"}.get(case_id)


def classify_extension(case_id: int, q, sol: TemplateSolution) -> dict:
    """Decide whether ``sol`` witnesses a further extension of ``case_id``."""
    if case_id not in _CONSTRAINTS:
        raise ValueError(f"extension detection covers cases 5-9, not {case_id}")
    if case_id == 7 and (q is None or Fraction(q) == 0):
        raise ValueError("case 7 needs a nonzero q")
    label = "7_q" if case_id == 7 else str(case_id)
    report = {
        "case": label,
        "q": format_rational(Fraction(q)) if q is not None else None,
        "constraint": _CONSTRAINTS[case_id],
        "solution_basis": sol.to_json(),
        "constraint_flags": [],
        "extension": False,
        "target_case": None,
        "p": None,
    }
    if sol.dim > 1:
        report["note"] = "more than one independent template: Fhat'' would vanish"
    for v, flags in zip(sol.basis, sol.flags or [_template_flags(v) for v in sol.basis]):
        ok = _meets(case_id, v, q) if sol.exact else _meets_float(case_id, v, q)
        a = v[0]
        a_nonzero = a != 0 if sol.exact else abs(float(a)) > 1e-9
        target = _a_branch_target(case_id, a_nonzero) if ok and flags["ab_nonzero"] else None
        entry = dict(flags)
        entry["constraint_met"] = bool(ok)
        entry["target_case"] = target
        report["constraint_flags"].append(entry)
        if target and not report["extension"]:
            report["extension"] = True
            report["target_case"] = target
            if target == "12":
                p = -Fraction(v[2]) / Fraction(v[0]) - 1 if sol.exact else -float(v[2]) / float(v[0]) - 1
                report["p"] = format_rational(p) if sol.exact else p
    return report


# ---------------------------------------------------------------- extension equations


@dataclass(frozen=True)
class ExtensionParams:
    """Parameters of the extension equations for the one-dimensional cases.

    ``case_id`` is 1, 2, 3 or 4.  ``xi`` and ``eta0`` are expressions in
    ``x`` (cases 1 and 3); ``eta0_hat`` is an expression in ``w`` (cases 2
    and 4, where ``w`` stands for x - t).
    """

    case_id: int
    eta1: Fraction = Fraction(0)
    delta: Fraction = Fraction(0)
    kappa: Fraction = Fraction(0)
    kappa_p: Fraction = Fraction(1)
    C1: Fraction = Fraction(0)
    C2: Fraction = Fraction(0)
    xi: Expr = ZERO
    eta0: Expr = ZERO
    eta0_hat: Expr = ZERO

    def __post_init__(self):
        for name in ("eta1", "delta", "kappa", "kappa_p", "C1", "C2"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        for name in ("xi", "eta0", "eta0_hat"):
            v = getattr(self, name)
            if isinstance(v, str):
                object.__setattr__(self, name, parse(v))
            elif not isinstance(v, Expr):
                object.__setattr__(self, name, num(v))
        if self.case_id not in (1, 2, 3, 4):
            raise ValueError("extension equations exist for cases 1-4")
        if self.case_id in (1, 3) and self.delta not in (0, 1):
            raise ValueError("delta must be 0 or 1")
        if self.case_id == 2 and self.kappa == 0:
            if self.delta not in (0, 1):
                raise ValueError("delta must be 0 or 1")
            if self.delta == 0 and self.kappa_p != 1:
                raise ValueError("kappa' is 1 when delta = 0")
        if (self.case_id == 4 or (self.case_id == 2 and self.kappa != 0)) and self.C1 == 0 and self.C2 == 0:
            raise ValueError("(C1, C2) must not both vanish")
        if self.case_id == 4 and self.kappa == 0 and self.C1 == self.C2:
            raise ValueError("C1 != C2 is required when kappa = 0")


W, W1, W2 = var("w"), var("w1"), var("w2")


def extension_residual(params: ExtensionParams, fhat: Expr) -> Expr:
    """Left side minus right side of the extension equation for ``params``."""
    P = params
    if P.case_id == 1:
        # fhat(x, u)
        return sub(
            add(mul(P.xi, diff(fhat, "x")), mul(add(mul(P.eta1, var("u")), P.eta0), diff(fhat, "u"))),
            mul(sub(sub(num(P.eta1), num(P.delta)), diff(P.xi, "x")), fhat),
        )
    if P.case_id == 3:
        # fhat(x, w) with w = exp(-t) u
        return sub(
            add(mul(P.xi, diff(fhat, "x")), mul(P.delta, W, diff(fhat, "w"))),
            mul(sub(num(P.delta), diff(P.xi, "x")), fhat),
        )
    if P.case_id == 2:
        # fhat(w, u) with w = x - t
        eh = P.eta0_hat
        if P.kappa == 0:
            lhs = add(
                mul(sub(mul(P.delta, W), num(P.kappa_p)), diff(fhat, "w")),
                mul(add(mul(P.eta1, var("u")), eh), diff(fhat, "u")),
            )
            rhs = sub(mul(P.eta1 - 2 * P.delta, fhat), diff(diff(eh, "w"), "w"))
            return sub(lhs, rhs)
        k = P.kappa
        ekw = fn("exp", mul(k, W))
        lhs = add(mul(sub(mul(P.C2, ekw), num(P.C1)), diff(fhat, "w")), mul(eh, diff(fhat, "u")))
        rhs = add(
            mul(-k, add(num(P.C1), mul(P.C2, ekw)), fhat),
            mul(k, diff(eh, "w")),
            mul(-1, diff(diff(eh, "w"), "w")),
        )
        return sub(lhs, rhs)
    # case 4: fhat(w1, w2), w1 = x - t, w2 = exp(-x-t) u; eta0_hat in w
    k = P.kappa
    eh = substitute(P.eta0_hat, {"w": W1})
    ekw = fn("exp", mul(k, W1))
    emw = fn("exp", mul(-1, W1))
    lhs = add(
        mul(sub(mul(P.C2, ekw), num(P.C1)), diff(fhat, "w1")),
        mul(add(mul(emw, eh), mul(-P.C2, W2, ekw), mul(-P.C1, W2)), diff(fhat, "w2")),
    )
    rhs = add(
        mul(-(k + 1), add(num(P.C1), mul(P.C2, ekw)), fhat),
        mul(k + 2, emw, diff(eh, "w1")),
        mul(-1, emw, diff(diff(eh, "w1"), "w1")),
    )
    return sub(lhs, rhs)


def verify_extension_eq(params: ExtensionParams, fhat: Expr, trials: int | None = None, **kw) -> bool:
    return is_zero(extension_residual(params, fhat), trials=trials, **kw)


def lift_fhat(case_id: int, fhat: Expr) -> Expr:
    """The arbitrary element ``f(t, x, u)`` of cases 1-4 built from ``fhat``."""
    t, x, u = var("t"), var("x"), var("u")
    if case_id == 1:
        return fhat
    if case_id == 2:
        return substitute(fhat, {"w": sub(x, t)})
    if case_id == 3:
        return mul(fn("exp", t), substitute(fhat, {"w": mul(fn("exp", mul(-1, t)), u)}))
    if case_id == 4:
        inner = substitute(fhat, {"w1": sub(x, t), "w2": mul(fn("exp", mul(-1, add(x, t))), u)})
        return mul(fn("exp", add(x, t)), inner)
    raise ValueError(case_id)


def extension_field(params: ExtensionParams) -> VectorField:
    """The additional vector field Q2 whose admission the equation encodes."""
    P = params
    t, x = var("t"), var("x")
    if P.case_id == 1:
        return VectorField(mul(P.delta, t), P.xi, P.eta1, P.eta0)
    if P.case_id == 3:
        return VectorField(ZERO, P.xi, P.delta, ZERO)
    omega = sub(x, t)
    eh = substitute(P.eta0_hat, {"w": omega})
    if P.case_id == 2 and P.kappa == 0:
        return VectorField(add(mul(P.delta, t), num(P.kappa_p)), mul(P.delta, x), P.eta1, eh)
    k = P.kappa
    tau = mul(P.C1, fn("exp", mul(k, t)))
    xi = mul(P.C2, fn("exp", mul(k, x)))
    if P.case_id == 2:
        return VectorField(tau, xi, Fraction(0), mul(fn("exp", mul(k, t)), eh))
    return VectorField(tau, xi, Fraction(0), mul(fn("exp", mul(k + 2, t)), eh))
