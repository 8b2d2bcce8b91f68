"""Classification data as verifiable records.

Case templates with their Lie invariance algebras, the equivalent variant
forms, the subclass with kernel d_t + d_x together with its admissible
transformations, the Lie reductions of the sl(2) case, the limit
processes between cases, and the light-cone to spacetime conversion.
Every record can be re-derived through the symbolic kernel.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath

from .equiv import (
    SWAP,
    EquivTransform,
    act_on_f,
    compose,
    pushforward_vf,
    space_map,
    time_map,
    verify_map,
)
from .expr import (
    Expr,
    SamplingExhausted,
    add,
    afn,
    diff,
    fn,
    format_rational,
    instantiate,
    is_zero,
    mul,
    neg,
    num,
    parse,
    sample_points,
    sub,
    substitute,
    var,
)
from .expr.numeric import current
from .invariants import (
    INF,
    InvalidSubalgebra,
    InvariantTuple,
    Subalgebra,
    _rationalize,
    _solve,
    _stacked,
    tuple12,
)
from .symcheck import is_symmetry
from .vfield import VectorField, parse_vf

__all__ = [
    "ParameterError",
    "CaseRecord",
    "AdmissibleRecord",
    "ReductionRecord",
    "LimitRecord",
    "STORED_TUPLES",
    "PARAM_SAMPLES",
    "MAIN_CASES",
    "VARIANTS",
    "K2_CASES",
    "get_case",
    "get_variant",
    "get_k2_case",
    "case_instances",
    "variant_instances",
    "k2_cases",
    "k2_admissible",
    "k2_equivalences",
    "verify_record",
    "verify_case",
    "verify_k2",
    "reductions",
    "verify_reduction",
    "limit_records",
    "verify_limit",
    "convert_spacetime",
    "verify_spacetime",
    "census",
    "export_json",
]


class ParameterError(ValueError):
    """A case parameter is missing or violates the case constraint."""


# ---------------------------------------------------------------- records


@dataclass(frozen=True)
class CaseRecord:
    id: str
    family: str
    f_template: Expr
    generators: tuple
    stored: Optional[InvariantTuple] = None
    param: Optional[tuple] = None
    schema: Optional[str] = None
    notes: str = ""

    @property
    def label(self) -> str:
        prefix = {"main": "Case", "variant": "Case", "k2": "K2 case"}[self.family]
        text = f"{prefix} {self.id}"
        if self.param:
            text += f"_{self.param[0]}={format_rational(self.param[1])}"
        return text

    @property
    def finite(self) -> bool:
        return self.schema is None

    def algebra(self) -> Subalgebra:
        params = (self.param,) if self.param else ()
        return Subalgebra(self.generators, self.label, params)

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "family": self.family,
            "f": self.f_template.render(),
            "generators": [str(q) for q in self.generators],
        }
        if self.param:
            out["param"] = {self.param[0]: format_rational(self.param[1])}
        if self.schema:
            out["generator_schema"] = self.schema
        if self.stored is not None:
            out["tuple12"] = str(self.stored)
        if self.notes:
            out["notes"] = self.notes
        return out


def _t(*values) -> InvariantTuple:
    return InvariantTuple(*values)


STORED_TUPLES = {
    "0": _t(0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "1": _t(1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0),
    "2": _t(1, 1, 1, 0, 0, 0, 1, 0, 0, 1, 1, 0),
    "3": _t(1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 2),
    "4": _t(1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 1),
    "5": _t(1, 2, 1, 1, 1, 0, 1, 1, 1, 1, 0, 2),
    "6": _t(1, 2, 1, 1, 0, 0, 1, 1, 1, 1, 1, 2),
    "7": _t(2, 2, 2, 1, 0, 0, 1, 0, 0, 1, 1, 1),
    "8": _t(2, 2, 1, 1, 1, 0, 1, 1, 0, 1, 0, 1),
    "9": _t(2, 3, 2, 0, 1, 1, 3, 1, 1, 2, 2, 0),
    "10": _t(3, 3, 3, 0, 0, 0, 3, 0, 0, 3, 3, 0),
    "11": _t(2, 3, 1, 1, 2, 0, 2, 2, 1, 2, 0, 2),
    "12": _t(2, 4, 2, 1, 1, 1, 3, 2, 1, 2, 2, 2),
    "13": _t(INF, INF, INF, 0, INF, INF, INF, INF, INF, INF, INF, 0),
}

PARAM_SAMPLES = {
    "7": ("q", (Fraction(1), Fraction(-1, 2), Fraction(3))),
    "8": ("q", (Fraction(1), Fraction(-1, 2), Fraction(3))),
    "12": ("p", (Fraction(2), Fraction(-3))),
}

CASE13_SCHEMA = "tau(t)*Dt + xi(x)*Dx - (tau'(t) + xi'(x))*du"


def _r(c: Fraction) -> str:
    return f"({format_rational(c)})"


def _vf(text: str) -> VectorField:
    return parse_vf(text)


def _gens(*texts) -> tuple:
    return tuple(_vf(t) for t in texts)


def _require(name: str, value, forbidden: Sequence) -> Fraction:
    if value is None:
        raise ParameterError(f"parameter {name} is required")
    value = Fraction(value)
    if value in forbidden:
        bad = ", ".join(format_rational(Fraction(v)) for v in forbidden)
        raise ParameterError(f"parameter {name} must avoid {bad}")
    return value


def _main(case_id: str, q=None, p=None) -> CaseRecord:
    def rec(f: str, gens: tuple, param=None, schema=None) -> CaseRecord:
        return CaseRecord(case_id, "main", parse(f), gens, STORED_TUPLES[case_id], param, schema)

    if case_id == "0":
        return rec("F(t,x,u)", ())
    if case_id == "1":
        return rec("F(x,u)", _gens("Dt(1)"))
    if case_id == "2":
        return rec("F(x-t,u)", _gens("Dt(1)+Dx(1)"))
    if case_id == "3":
        return rec("exp(t)*F(x,exp(-t)*u)", _gens("Dt(1)+I"))
    if case_id == "4":
        return rec("exp(x+t)*F(x-t,exp(-x-t)*u)", _gens("Dt(1)+Dx(1)+2*I"))
    if case_id == "5":
        return rec("exp(t)*F(exp(-t)*u)", _gens("Dt(1)+I", "Dx(1)"))
    if case_id == "6":
        return rec("exp(x+t)*F(exp(-x-t)*u)", _gens("Dt(1)+I", "Dx(1)+I"))
    if case_id == "7":
        q = _require("q", q, (0,))
        f = f"abs(x-t)^(-{_r(q)}-2)*F(abs(x-t)^{_r(q)}*u)"
        return rec(f, (_vf("Dt(1)+Dx(1)"), VectorField("t", "x", -q)), ("q", q))
    if case_id == "8":
        q = _require("q", q, (0,))
        f = f"abs(x)^(-{_r(q)}-2)*F(abs(x)^{_r(q)}*u)"
        return rec(f, (_vf("Dt(1)"), VectorField("t", "x", -q)), ("q", q))
    if case_id == "9":
        return rec("F(u)", _gens("Dt(1)", "Dx(1)", "Dt(t)-Dx(x)"))
    if case_id == "10":
        return rec("(x-t)^(-2)*F(u)", _gens("Dt(1)+Dx(1)", "Dt(t)+Dx(x)", "Dt(t^2)+Dx(x^2)"))
    if case_id == "11":
        return rec("exp(u/x)", _gens("Dt(1)", "Dt(t)+Z(-x)", "Dx(x)+I"))
    if case_id == "12":
        p = _require("p", p, (-1, 0))
        gens = _gens("Dt(1)", "Dx(1)", "Dt(t)-Dx(x)") + (VectorField(mul(-p, var("t")), 0, 1),)
        return rec(f"abs(u)^{_r(p)}*u", gens, ("p", p))
    if case_id == "13":
        return rec("exp(u)", (), schema=CASE13_SCHEMA)
    raise ParameterError(f"unknown case {case_id!r}")


MAIN_CASES = tuple(str(i) for i in range(14))
VARIANTS = ("3'", "4'", "5'", "6'", "8'a", "8'b")
K2_CASES = ("2", "6", "7", "9a", "9b", "10a", "10b", "10c", "10d", "12a", "12b", "13")


def get_case(case_id, q=None, p=None) -> CaseRecord:
    """Case of the main classification list, with ``q`` for 7, 8 and ``p`` for 12."""
    case_id = str(case_id)
    if case_id not in MAIN_CASES:
        raise ParameterError(f"unknown case {case_id!r}")
    if q is not None and case_id not in ("7", "8"):
        raise ParameterError(f"case {case_id} takes no q")
    if p is not None and case_id != "12":
        raise ParameterError(f"case {case_id} takes no p")
    return _main(case_id, q, p)


def get_variant(variant: str, q=None) -> CaseRecord:
    """Equivalent forms of Cases 3-6 and 8 without a prefactor."""

    def rec(f, gens, param=None):
        base = variant[0]
        return CaseRecord(variant, "variant", parse(f), gens, STORED_TUPLES[base], param)

    if variant == "3'":
        return rec("F(x,u/t)", _gens("Dt(t)+I"))
    if variant == "4'":
        return rec("F(x/t,u/(t*x))", _gens("Dt(t)+Dx(x)+2*I"))
    if variant == "5'":
        return rec("F(u/t)", _gens("Dt(t)+I", "Dx(1)"))
    if variant == "6'":
        return rec("F(u/(t*x))", _gens("Dt(t)+I", "Dx(x)+I"))
    if variant == "8'a":
        q = _require("q'", q, (0, -1))
        gens = (_vf("Dt(1)"), VectorField(mul(q + 1, var("t")), neg(var("x")), q))
        return rec(f"F(abs(x)^{_r(q)}*u)", gens, ("q'", q))
    if variant == "8'b":
        return rec("F(exp(-x)*u)", _gens("Dt(1)", "Dt(t)+Dx(1)+I"))
    raise ParameterError(f"unknown variant {variant!r}")


def get_k2_case(case_id: str, p=None, q=None) -> CaseRecord:
    """Cases of the subclass f = F(x - t, u) up to its own equivalence group."""

    def rec(f, gens, param=None, schema=None):
        base = case_id.rstrip("abcd")
        return CaseRecord(case_id, "k2", parse(f), gens, STORED_TUPLES[base], param, schema)

    if case_id == "2":
        return rec("F(x-t,u)", _gens("Dt(1)+Dx(1)"))
    if case_id == "6":
        return rec("exp(-x+t)*F(exp(x-t)*u)", _gens("Dt(1)+I", "Dx(1)-I"))
    if case_id == "7":
        base = _main("7", q)
        return replace(base, family="k2")
    if case_id == "9a":
        return rec("F(u)", _gens("Dt(1)", "Dx(1)", "Dt(t)-Dx(x)"))
    if case_id == "9b":
        return rec("F(u)*exp(x-t)", _gens("Dt(exp(t))", "Dx(exp(-x))", "Dt(1)+Dx(1)"))
    if case_id == "10a":
        return rec("F(u)*(x-t)^(-2)", _gens("Dt(1)+Dx(1)", "Dt(t)+Dx(x)", "Dt(t^2)+Dx(x^2)"))
    if case_id == "10b":
        return rec(
            "F(u)*cos(x-t)^(-2)",
            _gens("Dt(1)+Dx(1)", "Dt(cos(2*t))-Dx(cos(2*x))", "Dt(sin(2*t))-Dx(sin(2*x))"),
        )
    if case_id == "10c":
        return rec(
            "F(u)*cosh(x-t)^(-2)",
            _gens("Dt(1)+Dx(1)", "Dt(exp(2*t))-Dx(exp(2*x))", "Dt(exp(-2*t))-Dx(exp(-2*x))"),
        )
    if case_id == "10d":
        return rec(
            "F(u)*sinh(x-t)^(-2)",
            _gens("Dt(1)+Dx(1)", "Dt(exp(2*t))+Dx(exp(2*x))", "Dt(exp(-2*t))+Dx(exp(-2*x))"),
        )
    if case_id == "12a":
        return replace(_main("12", p=p), id="12a", family="k2")
    if case_id == "12b":
        p = _require("p", p, (-1, 0))
        gens = _gens("Dt(exp(t))", "Dx(exp(-x))", "Dt(1)+Dx(1)") + (VectorField(num(p), 0, 1),)
        return rec(f"abs(u)^{_r(p)}*u*exp(x-t)", gens, ("p", p))
    if case_id == "13":
        return replace(_main("13"), family="k2")
    raise ParameterError(f"unknown K2 case {case_id!r}")


def case_instances() -> list[CaseRecord]:
    """All main cases at the standard parameter samples."""
    out = []
    for cid in MAIN_CASES:
        if cid in PARAM_SAMPLES:
            name, values = PARAM_SAMPLES[cid]
            out.extend(get_case(cid, **{name: v}) for v in values)
        else:
            out.append(get_case(cid))
    return out


def variant_instances() -> list[CaseRecord]:
    out = []
    for v in VARIANTS:
        if v == "8'a":
            out.extend(get_variant(v, q) for q in (Fraction(1), Fraction(-1, 2), Fraction(3)))
        else:
            out.append(get_variant(v))
    return out


def k2_cases() -> list[CaseRecord]:
    out = []
    for cid in K2_CASES:
        if cid == "7":
            out.extend(get_k2_case(cid, q=q) for q in PARAM_SAMPLES["7"][1])
        elif cid in ("12a", "12b"):
            out.extend(get_k2_case(cid, p=p) for p in PARAM_SAMPLES["12"][1])
        else:
            out.append(get_k2_case(cid))
    return out


# ---------------------------------------------------------------- verification


def _check(name: str, passed: bool, detail: str = "") -> dict:
    out = {"check": name, "passed": bool(passed)}
    if detail:
        out["detail"] = detail
    return out


def _safe_symmetry(f: Expr, q: VectorField, trials) -> tuple[bool, str]:
    try:
        return is_symmetry(f, q, trials=trials), ""
    except SamplingExhausted as err:
        return False, f"sampling exhausted: {err}"


def _random_poly(rng: random.Random, v: str, degree: int = 4) -> Expr:
    return add(*(mul(Fraction(rng.randint(-5, 5), rng.randint(1, 4)), var(v) ** k) for k in range(degree + 1)))


def case13_instances(count: int = 10, seed: int | None = None) -> list[VectorField]:
    """Random members of the infinite-dimensional algebra of f = exp(u)."""
    seed = current().seed if seed is None else seed
    rng = random.Random(f"kglie|{seed}|case13")
    out = []
    for _ in range(count):
        tau = _random_poly(rng, "t")
        xi = _random_poly(rng, "x")
        out.append(VectorField(tau, xi, 0, neg(add(diff(tau, "t"), diff(xi, "x")))))
    return out


def verify_record(rec: CaseRecord, trials: int | None = None, tuples: bool = True) -> dict:
    """Symmetry, closure and invariant checks for one case record."""
    checks = []
    gens = rec.generators if rec.finite else tuple(case13_instances())
    for i, q in enumerate(gens, 1):
        ok, why = _safe_symmetry(rec.f_template, q, trials)
        checks.append(_check(f"symmetry Q{i}: {q}", ok, why or ("" if ok else "classifying residual is nonzero")))
    constants = {}
    if rec.finite:
        try:
            constants = rec.algebra().validate()
            checks.append(_check("bracket closure", True))
        except InvalidSubalgebra as err:
            checks.append(_check("bracket closure", False, str(err)))
        if tuples and rec.stored is not None and all(c["passed"] for c in checks):
            computed = tuple12(rec.algebra())
            ok = computed == rec.stored
            detail = f"computed {computed}, stored {rec.stored}"
            checks.append(_check("invariant tuple", ok, detail))
    return {
        "case": rec.label,
        "f": rec.f_template.render(),
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        "structure_constants": {
            f"[Q{i + 1},Q{j + 1}]": [format_rational(c) for c in v] for (i, j), v in sorted(constants.items())
        },
    }


def verify_case(case_id, q=None, p=None, trials: int | None = None) -> dict:
    return verify_record(get_case(case_id, q=q, p=p), trials)


# ---------------------------------------------------------------- admissible transformations


@dataclass(frozen=True)
class AdmissibleRecord:
    label: str
    f_template: Expr
    transform: Callable
    f_target: Expr
    samples: tuple
    domain_note: str = ""
    forbidden: tuple = ()

    def instance(self, param) -> EquivTransform:
        if param in self.forbidden:
            raise ParameterError(f"{self.label}: parameter {param} outside the domain ({self.domain_note})")
        return self.transform(param)


def _tr(T: str, X: str, U0: str = "0") -> EquivTransform:
    return EquivTransform(T=parse(T), X=parse(X), U0=parse(U0), Tinv=None, Xinv=None, check=False)


def _t5(pair) -> EquivTransform:
    T, X = (parse(s) for s in pair)
    return EquivTransform(T=T, X=X, U0=neg(fn("ln", mul(diff(T, "t"), diff(X, "x")))), check=False)


T5_REPRESENTATIVES = (("exp(t)", "x"), ("t^3+t", "exp(x)"), ("t", "x^3+x"))


def k2_admissible() -> list[AdmissibleRecord]:
    return [
        AdmissibleRecord("T1", parse("F(u)"), lambda _: _tr("-t", "x"), parse("-F(u)"), (None,)),
        AdmissibleRecord(
            "T2",
            parse("F(u)"),
            lambda g: _tr(f"exp({_r(g)})*t", f"exp(-{_r(g)})*x"),
            parse("F(u)"),
            (Fraction(1, 2), Fraction(-1), Fraction(2)),
            "gamma != 0",
            (Fraction(0),),
        ),
        AdmissibleRecord("T3", parse("F(u)*exp(x-t)"), lambda _: _tr("-exp(-t)", "exp(x)"), parse("F(u)"), (None,)),
        AdmissibleRecord(
            "T4a", parse("F(u)*(x-t)^(-2)"), lambda _: _tr("1/t", "1/x"), parse("F(u)*(x-t)^(-2)"), (None,)
        ),
        AdmissibleRecord(
            "T4b",
            parse("F(u)*cos(x-t)^(-2)"),
            lambda _: _tr("tan(t)", "-cot(x)"),
            parse("F(u)*(x-t)^(-2)"),
            (None,),
            "x~ = -cot x with f = +F cos^-2(x-t)",
        ),
        AdmissibleRecord(
            "T4c",
            parse("-F(u)*cosh(x-t)^(-2)"),
            lambda _: _tr("-exp(2*t)/2", "exp(2*x)/2"),
            parse("F(u)*(x-t)^(-2)"),
            (None,),
        ),
        AdmissibleRecord(
            "T4d",
            parse("F(u)*sinh(x-t)^(-2)"),
            lambda _: _tr("exp(2*t)/2", "exp(2*x)/2"),
            parse("F(u)*(x-t)^(-2)"),
            (None,),
        ),
        AdmissibleRecord(
            "T5",
            parse("exp(u)"),
            _t5,
            parse("exp(u)"),
            T5_REPRESENTATIVES,
            "T'X' > 0, (T'', X'') != (0, 0), one representative per coset",
        ),
    ]


def _record_holds(f: Expr, tr: EquivTransform, target: Expr, trials) -> tuple[bool, str]:
    try:
        return verify_map(f, tr, target, trials=trials), ""
    except SamplingExhausted as err:
        return False, f"sampling exhausted: {err}"


def perturbations(rec: AdmissibleRecord, param) -> list[tuple[str, Expr, EquivTransform, Expr]]:
    """Single-sign flips of the target and of each nonzero transform component."""
    tr = rec.instance(param)
    out = [("f_target", rec.f_template, tr, neg(rec.f_target))]
    for name in ("T", "X", "U0"):
        comp = getattr(tr, name)
        if comp.is_number and comp.value == 0:
            continue
        flipped = replace(tr, **{name: neg(comp), "check": False})
        out.append((name, rec.f_template, flipped, rec.f_target))
    return out


def _negate_F(f: Expr) -> Expr:
    return instantiate(f, "F", ("s",), neg(afn("F", (var("s"),))))


_K2_EQUIVALENCES = (
    # transform, source, target, negate F in source, negate F in target
    ("T1", "9a", "9a", False, True),
    ("T3", "9b", "9a", False, False),
    ("T3", "12b", "12a", False, False),
    ("T4b", "10b", "10a", False, False),
    ("T4c", "10c", "10a", True, False),
    ("T4d", "10d", "10a", False, False),
)


def k2_equivalences(trials: int | None = None) -> list[dict]:
    """Additional equivalences between K2 cases, realized by the admissible records."""
    recs = {r.label: r for r in k2_admissible()}
    out = []
    for label, src, dst, neg_src, neg_dst in _K2_EQUIVALENCES:
        rec = recs[label]
        p = Fraction(2) if src.startswith("12") else None
        f_src = get_k2_case(src, p=p).f_template
        f_dst = get_k2_case(dst, p=p).f_template
        if neg_src:
            f_src = _negate_F(f_src)
        if neg_dst:
            f_dst = _negate_F(f_dst)
        ok, why = _record_holds(f_src, rec.instance(rec.samples[0]), f_dst, trials)
        entry = {
            "transform": label,
            "source": f"K2 case {src}" + (" with F -> -F" if neg_src else ""),
            "target": f"K2 case {dst}" + (" with F -> -F" if neg_dst else ""),
            "passed": ok,
        }
        if why:
            entry["detail"] = why
        out.append(entry)
    return out


def verify_k2(trials: int | None = None) -> dict:
    cases = [verify_record(r, trials, tuples=False) for r in k2_cases()]
    admissible = []
    for rec in k2_admissible():
        for param in rec.samples:
            tr = rec.instance(param)
            ok, why = _record_holds(rec.f_template, tr, rec.f_target, trials)
            entry = {"record": rec.label, "transform": tr.literal(), "passed": ok}
            if param is not None:
                entry["parameter"] = param if isinstance(param, tuple) else format_rational(param)
            if why:
                entry["detail"] = why
            admissible.append(entry)
    equivalences = k2_equivalences(trials)
    passed = all(c["passed"] for c in cases) and all(a["passed"] for a in admissible)
    passed = passed and all(e["passed"] for e in equivalences)
    return {"passed": passed, "cases": cases, "admissible": admissible, "equivalences": equivalences}


# ---------------------------------------------------------------- reductions


@dataclass(frozen=True)
class ReductionRecord:
    label: str
    generator: VectorField
    omega: Expr
    rhs: Expr  # in the variables phi (the unknown) and w (the invariant)
    f_template: Expr = field(default_factory=lambda: parse("F(u)*(x-t)^(-2)"))


def reductions() -> list[ReductionRecord]:
    return [
        ReductionRecord("1", _vf("Dt(1)+Dx(1)"), parse("x-t"), parse("-F(phi)*w^(-2)")),
        ReductionRecord(
            "2", _vf("Dt(t)+Dx(x)"), parse("ln(abs(x))/2-ln(abs(t))/2"), parse("-F(phi)*sinh(w)^(-2)")
        ),
        ReductionRecord(
            "3", _vf("Dt(1+t^2)+Dx(1+x^2)"), parse("atan(x)-atan(t)"), parse("-F(phi)*sin(w)^(-2)")
        ),
    ]


def reduction_residual(r: ReductionRecord) -> Expr:
    """``u_tx - f`` on the ansatz minus ``w_t w_x (phi'' - R)``."""
    w = r.omega
    phi = afn("phi", (w,))
    u_tx = diff(diff(phi, "t"), "x")
    f_on_ansatz = substitute(r.f_template, {"u": phi})
    rhs = substitute(r.rhs, {"phi": phi, "w": w})
    phi2 = afn("phi", (w,), (2,))
    expected = mul(diff(w, "t"), diff(w, "x"), sub(phi2, rhs))
    return sub(sub(u_tx, f_on_ansatz), expected)


def verify_reduction(r: ReductionRecord, trials: int | None = None) -> bool:
    """Residual identity plus invariance of the ansatz variable."""
    if not is_zero(r.generator.apply(r.omega), trials=trials):
        return False
    return is_zero(reduction_residual(r), trials=trials)


# ---------------------------------------------------------------- limit processes


@dataclass(frozen=True)
class LimitRecord:
    label: str
    source: str
    target: str
    direction: str  # "0" or "inf"
    f_family: Callable  # q -> f^q
    generators: Callable  # q -> source algebra basis
    transform: Callable  # q -> EquivTransform
    f_printed: Callable  # q -> transformed f
    printed: Callable  # q -> printed generator family
    contracted: tuple
    contracted_in_target: Optional[tuple] = None  # (case id, EquivTransform) the contracted algebra sits in

    @property
    def path(self) -> tuple:
        if self.direction == "inf":
            return (Fraction(10**2), Fraction(10**3), Fraction(10**4))
        return (Fraction(1, 10**2), Fraction(1, 10**3), Fraction(1, 10**4))


def _case8_family(q):
    return parse(f"{_r(q)}*abs(x)^(-{_r(q)}-2)*F(abs(x)^{_r(q)}*u)")


def limit_records() -> list[LimitRecord]:
    return [
        LimitRecord(
            "8->5",
            "8",
            "5",
            "inf",
            _case8_family,
            lambda q: (_vf("Dt(1)"), VectorField("t", "x", -q).scale(1 / q)),
            lambda q: space_map(mul(q, sub(var("x"), 1))),
            lambda q: parse(f"abs(1+x/{_r(q)})^(-{_r(q)}-2)*F(abs(1+x/{_r(q)})^{_r(q)}*u)"),
            lambda q: (_vf("Dt(1)"), VectorField(mul(1 / q, var("t")), add(1, mul(1 / q, var("x"))), -1)),
            _gens("Dt(1)", "Dx(1)-I"),
            ("5", compose(SWAP, time_map(neg(var("t"))))),
        ),
        LimitRecord(
            "2->1",
            "2",
            "1",
            "0",
            lambda q: parse(f"F(x-t,u)/{_r(q)}"),
            lambda q: (_vf("Dt(1)+Dx(1)").scale(q),),
            lambda q: time_map(mul(1 / q, var("t"))),
            lambda q: parse(f"F(x-{_r(q)}*t,u)"),
            lambda q: (VectorField(1, num(q), 0),),
            _gens("Dt(1)"),
            ("1", None),
        ),
        LimitRecord(
            "7->10",
            "7",
            "10",
            "0",
            lambda q: get_case("7", q=q).f_template,
            lambda q: get_case("7", q=q).generators,
            lambda q: EquivTransform(),
            lambda q: get_case("7", q=q).f_template,
            lambda q: (_vf("Dt(1)+Dx(1)"), VectorField("t", "x", -q)),
            _gens("Dt(1)+Dx(1)", "Dt(t)+Dx(x)"),
            ("10", None),
        ),
    ]


_DEVIATION_POINTS = 12


def span_deviation(gens: Sequence[VectorField], basis: Sequence[VectorField], seed: int = 0) -> float:
    """Largest relative least-squares distance of ``gens`` from span(``basis``)."""
    with mpmath.workprec(current().precision):
        pts = sample_points(["t", "x"], _DEVIATION_POINTS, seed, "deviation")
        A = mpmath.matrix([list(r) for r in zip(*[_stacked(b, pts) for b in basis])])
        worst = mpmath.mpf(0)
        for g in gens:
            y = mpmath.matrix(_stacked(g, pts))
            coeffs = mpmath.lu_solve(A.T * A, A.T * y)
            resid = mpmath.norm(y - A * coeffs) / mpmath.norm(y)
            worst = max(worst, resid)
        return float(worst)


def _same_span(a: Sequence[VectorField], b: Sequence[VectorField]) -> bool:
    """Exact span equality: each side is a certified rational combination of the other."""
    for xs, ys in ((a, b), (b, a)):
        with mpmath.workprec(current().precision):
            pts = sample_points(["t", "x"], len(ys) + 4, current().seed, "span")
            rows = [list(r) for r in zip(*[_stacked(y, pts) for y in ys])]
            for g in xs:
                sol, _ = _solve(rows, _stacked(g, pts))
                if sol is None:
                    return False
                coeffs = [_rationalize(c) for c in sol]
                combo = VectorField()
                for c, y in zip(coeffs, ys):
                    combo = combo + y.scale(c)
                if not g.equals(combo):
                    return False
    return True


def verify_limit(rec: LimitRecord, q_test, trials: int | None = None) -> dict:
    q_test = Fraction(q_test)
    if q_test == 0 or (rec.direction == "inf" and q_test < 0):
        raise ParameterError(f"q = {q_test} is outside the path of {rec.label}")
    checks = []
    tr = rec.transform(q_test)
    f_new = act_on_f(tr, rec.f_family(q_test))
    ok = verify_map(rec.f_family(q_test), tr, rec.f_printed(q_test), trials=trials)
    checks.append(_check("transformed arbitrary element", ok))
    pushed = [pushforward_vf(tr, g) for g in rec.generators(q_test)]
    printed = rec.printed(q_test)
    match = len(pushed) == len(printed) and all(a.equals(b) for a, b in zip(pushed, printed))
    checks.append(_check("pushforward matches printed family", match, "; ".join(str(g) for g in pushed)))
    sym = all(is_symmetry(f_new, g, trials=trials) for g in printed)
    checks.append(_check("printed family is a symmetry of the transformed element", sym))
    if rec.contracted_in_target is not None:
        case_id, image = rec.contracted_in_target
        target = get_case(case_id)
        algebra = [pushforward_vf(image, g) for g in target.generators] if image else list(target.generators)
        contained = all(
            _same_span(list(algebra), list(algebra) + [c]) for c in rec.contracted
        )
        checks.append(_check(f"contracted algebra lies in the Case {case_id} image", contained))
    deviations = [span_deviation(rec.printed(q), rec.contracted) for q in rec.path]
    monotone = all(a > b for a, b in zip(deviations, deviations[1:]))
    checks.append(
        _check(
            "deviation decreases along the path",
            monotone,
            ", ".join(f"q={format_rational(q)}: {d:.3e}" for q, d in zip(rec.path, deviations)),
        )
    )
    return {
        "limit": rec.label,
        "q_test": format_rational(q_test),
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        "deviations": {format_rational(q): d for q, d in zip(rec.path, deviations)},
    }


# ---------------------------------------------------------------- coordinates


def convert_spacetime(f: Expr) -> Expr:
    """Rewrite ``f(t, x, u)`` in spacetime variables ``tc = x + t``, ``xc = x - t``, ``uc = u``."""
    tc, xc = var("tc"), var("xc")
    half = Fraction(1, 2)
    return substitute(
        f, {"t": mul(half, sub(tc, xc)), "x": mul(half, add(tc, xc)), "u": var("uc")}
    )


def verify_spacetime(f: Expr, trials: int | None = None) -> bool:
    """``fc`` agrees with ``f`` pointwise and the wave operators correspond."""
    t, x = var("t"), var("x")
    fc = convert_spacetime(f)
    back = substitute(fc, {"tc": add(x, t), "xc": sub(x, t), "uc": var("u")})
    if not is_zero(sub(back, f), trials=trials):
        return False
    args = (add(x, t), sub(x, t))
    U = afn("U", args)
    lhs = diff(diff(U, "t"), "x")
    rhs = sub(afn("U", args, (2, 0)), afn("U", args, (0, 2)))
    return is_zero(sub(lhs, rhs), trials=trials)


# ---------------------------------------------------------------- summaries


def census() -> set:
    """The (m, n, k) triples realized by the finite cases with n >= 1."""
    out = set()
    for rec in case_instances():
        if rec.finite and rec.generators:
            out.add(tuple12(rec.algebra()).mnk)
    return out


def export_json() -> str:
    records = [r.to_json() for r in case_instances() + variant_instances() + k2_cases()]
    return json.dumps(records, indent=2, sort_keys=True, ensure_ascii=False)
