import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kglie.expr import diff, is_zero, parse, sub
from kglie.symcheck import (
    ExtensionParams,
    TemplateError,
    classify_extension,
    classifying_residual,
    detect_template,
    extension_field,
    is_symmetry,
    lift_fhat,
    verify_extension_eq,
)
from kglie.vfield import I, parse_vf

F = (Fraction(1), Fraction(0), Fraction(-3), Fraction(0))


def span_equal(a, b):
    """Equality of spans of exact rational vectors via row reduction ranks."""
    import sympy

    ma, mb = sympy.Matrix(a) if a else None, sympy.Matrix(b) if b else None
    if ma is None or mb is None:
        return ma is None and mb is None
    return ma.rank() == mb.rank() == sympy.Matrix.vstack(ma, mb).rank()


# ---------------------------------------------------------------- residual


def test_residual_of_liouville_generator():
    q = parse_vf("Dt(t^2)+Dx(x)+Z(-2*t-1)")
    assert is_zero(classifying_residual(parse("exp(u)"), q))


def test_residual_of_translation_is_exactly_zero():
    assert classifying_residual(parse("F(u)"), parse_vf("Dt(1)")) == parse("0")


def test_residual_of_scaling_on_generic_f():
    r = classifying_residual(parse("F(u)"), I)
    assert is_zero(sub(r, parse("u*F_1(u) - F(u)")))
    assert not is_zero(r)


def test_residual_formula_term_by_term():
    # tau f_t + xi f_x + (eta1 u + eta0) f_u - (eta1 - tau' - xi') f - eta0_tx
    f = parse("F(t, x, u)")
    q = parse_vf("vf{tau=t^2; xi=sin(x); eta1=3/2; eta0=t*x^2}")
    expected = parse(
        "t^2*F_1_0_0(t,x,u) + sin(x)*F_0_1_0(t,x,u) + (3/2*u + t*x^2)*F_0_0_1(t,x,u)"
        " - (3/2 - 2*t - cos(x))*F(t,x,u) - 2*x"
    )
    assert is_zero(sub(classifying_residual(f, q), expected))


def test_symmetry_examples():
    assert is_symmetry(parse("abs(u)^2*u"), parse_vf("Dt(-2*t)+I"))
    assert is_symmetry(parse("exp(u/x)"), parse_vf("Dt(t)+Z(-x)"))
    assert not is_symmetry(parse("exp(u)"), parse_vf("Dt(1)+I"))


# ---------------------------------------------------------------- template detection


def test_template_cube():
    sol = detect_template(parse("w^3"))
    assert sol.exact and sol.dim == 1
    assert span_equal(list(sol.basis), [F])


def test_template_exponential():
    sol = detect_template(parse("exp(w)"))
    assert sol.dim == 1
    a, b, c, d = sol.basis[0]
    assert a == 0 and d == 0 and b == -c and b != 0


def test_template_tzitzeica_is_empty():
    assert detect_template(parse("exp(w)+exp(-2*w)")).dim == 0


def test_template_rejects_linear():
    with pytest.raises(TemplateError):
        detect_template(parse("3*w - 1"))


@pytest.mark.parametrize("scale", [Fraction(7, 2), Fraction(-3), Fraction(1, 5)])
def test_template_scaling(scale):
    # homogeneous templates (d = 0) are unchanged; the inhomogeneous term
    # d scales with Fhat, so (a, b, c, d) -> (a, b, c, scale * d)
    for text in ("w^3", "exp(w)", "(w+1)^3+2"):
        base = detect_template(parse(text))
        scaled = detect_template(parse(f"{scale.numerator}/{scale.denominator}*({text})"))
        assert base.dim == scaled.dim == 1
        a, b, c, d = base.basis[0]
        expected = [(a, b, c, scale * d)]
        assert span_equal(list(scaled.basis), expected)
        if d == 0:
            assert span_equal(list(base.basis), list(scaled.basis))


@pytest.mark.parametrize("text", ["w^3+exp(w)", "sin(w)+w^2", "exp(w^2)", "w^4+w"])
def test_generic_fhat_has_no_template(text):
    assert detect_template(parse(text)).dim == 0


# ---------------------------------------------------------------- classification


def test_case9_extensions():
    rep = classify_extension(9, None, detect_template(parse("exp(w)")))
    assert rep["extension"] and rep["target_case"] == "13"
    rep = classify_extension(9, None, detect_template(parse("w^3")))
    assert rep["extension"] and rep["target_case"] == "12" and rep["p"] == "2"
    rep = classify_extension(9, None, detect_template(parse("exp(w)+exp(-2*w)")))
    assert not rep["extension"] and rep["target_case"] is None


@pytest.mark.parametrize(
    "q, text",
    [
        (Fraction(1), "w^3"),
        (Fraction(1), "(w+1)^3+2"),
        (Fraction(3), "w^(5/3)"),
        (Fraction(3), "(w+1)^(5/3)+12"),
    ],
)
def test_case7_power_templates(q, text):
    sol = detect_template(parse(text))
    assert sol.dim == 1
    a, b, c, d = sol.basis[0]
    assert c == -(1 + 2 / q) * a
    assert d == -(q + 1) * (q + 2) * b
    rep = classify_extension(7, q, sol)
    assert rep["extension"] and rep["target_case"] == "12" and Fraction(rep["p"]) == 2 / q


def test_case7_off_template_constant():
    rep = classify_extension(7, Fraction(3), detect_template(parse("(w+1)^(5/3)+11")))
    assert not rep["extension"]


def test_case5_and_case6_constraints():
    # ad = 0 holds for exp(w) (a = 0); ad = bc fails for exp(w) (b c = -b^2)
    assert classify_extension(5, None, detect_template(parse("exp(w)")))["extension"]
    assert not classify_extension(6, None, detect_template(parse("exp(w)")))["extension"]


def test_case7_requires_q():
    with pytest.raises(ValueError):
        classify_extension(7, 0, detect_template(parse("w^3")))


# ---------------------------------------------------------------- extension equations


def test_extension_equation_translation():
    assert verify_extension_eq(ExtensionParams(1, xi=parse("1")), parse("F(u)"))


@pytest.mark.parametrize("q", [Fraction(1), Fraction(-1, 2), Fraction(3)])
def test_extension_equation_case8_family(q):
    params = ExtensionParams(1, xi=parse("x"), eta1=-q, delta=1)
    fhat = parse(f"abs(x)^(-({q})-2)*F(abs(x)^({q})*u)")
    assert verify_extension_eq(params, fhat)
    # the equation encodes admission of the extra field by the lifted element
    assert is_symmetry(lift_fhat(1, fhat), extension_field(params))


def test_extension_equation_case3_mismatch():
    params = ExtensionParams(3, xi=parse("1"), delta=1)
    assert verify_extension_eq(params, parse("exp(x)*F(exp(-x)*w)"))
    assert not verify_extension_eq(params, parse("F(exp(-x)*w)"))


def test_extension_parameter_constraints():
    with pytest.raises(ValueError):
        ExtensionParams(1, delta=2)
    with pytest.raises(ValueError):
        ExtensionParams(4)
    with pytest.raises(ValueError):
        ExtensionParams(5)


# ---------------------------------------------------------------- properties


@settings(max_examples=10, deadline=None)
@given(st.fractions(-6, 6, max_denominator=5).filter(lambda c: c != 0))
def test_scale_invariance_property(c):
    base = detect_template(parse("w^3"))
    scaled = detect_template(parse(f"({c.numerator}/{c.denominator})*w^3"))
    assert span_equal(list(base.basis), list(scaled.basis))
