import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kglie.equiv import (
    SWAP,
    EquivTransform,
    MissingInverse,
    ProlongedTransform,
    act_on_f,
    compose,
    contact_check,
    discrete_group_table,
    identity,
    parse_transform,
    prolong1,
    pushforward_vf,
    scale_u,
    shift,
    space_map,
    time_map,
    verify_map,
)
from kglie.expr import ParseError, is_zero, parse, sub, var
from kglie.vfield import Dt, Dx, I, Z, parse_vf

import properties
from randgen import transform

seeds = st.integers(min_value=0, max_value=2**32)


def same(a, b):
    return is_zero(sub(a, b))


# ---------------------------------------------------------------- action on f


def test_identity_action():
    f = parse("exp(t)*F(x, u)")
    assert same(act_on_f(identity(), f), f)


def test_scaling_action():
    assert same(act_on_f(scale_u(2), parse("exp(u)")), parse("2*exp(u/2)"))


def test_shift_action():
    assert same(act_on_f(shift(parse("t*x")), parse("exp(u)")), parse("exp(u - t*x) + 1"))


def test_swap_action():
    assert same(act_on_f(SWAP, parse("F(t, x, u)")), parse("F(x, t, u)"))


def test_act_needs_inverses():
    tr = EquivTransform(T=parse("t^3"), check=False)
    with pytest.raises(MissingInverse):
        act_on_f(tr, parse("exp(u)"))


def test_zero_scaling_rejected():
    with pytest.raises(ValueError):
        scale_u(0)


def test_wrong_inverse_rejected():
    with pytest.raises(ValueError):
        time_map(parse("exp(t)"), parse("ln(t)+1"))


def test_relational_map_examples():
    t1 = EquivTransform(T=parse("-t"), check=False)
    assert verify_map(parse("F(u)"), t1, parse("-F(u)"))
    t4d = EquivTransform(T=parse("exp(2*t)/2"), X=parse("exp(2*x)/2"), check=False)
    f = parse("F(u)*sinh(x-t)^(-2)")
    assert verify_map(f, t4d, parse("F(u)*(x-t)^(-2)"))
    assert not verify_map(f, t4d, parse("-F(u)*(x-t)^(-2)"))


# ---------------------------------------------------------------- pushforward


def test_pushforward_examples():
    U0 = parse("t*x^2")
    assert pushforward_vf(shift(U0), I).equals(I - Z(U0))
    assert pushforward_vf(time_map(parse("2*t")), Dt(1)).equals(Dt(2))
    assert pushforward_vf(SWAP, Dt(1)).equals(Dx(1))


def test_pushforward_rules():
    # D^t(tau) under t~ = T(t) becomes D^t(tau(T^) T'(T^))
    assert pushforward_vf(time_map(parse("exp(t)"), parse("ln(t)")), Dt(1)).equals(Dt("t"))
    # Z(U0) shift adds Z(tau U0_t) to D^t(tau)
    assert pushforward_vf(shift(parse("t^2*x")), Dt(1)).equals(parse_vf("Dt(1) + Z(2*t*x)"))
    assert pushforward_vf(scale_u(3), Z("t")).equals(Z("3*t"))


# ---------------------------------------------------------------- composition


def test_compose_examples():
    assert compose(scale_u(2), scale_u(3)) == scale_u(6)
    assert compose(SWAP, SWAP) == identity()
    a, b = parse("t*x"), parse("sin(t)")
    c = compose(shift(a), shift(b))
    assert c.C == 1 and not c.swap and same(c.U0, a + b)


def test_compose_acts_like_successive_application():
    # concrete f: composites yield equal but structurally distinct arguments
    # inside abstract functions, which the oracle would key independently
    rng = random.Random(11)
    f = parse("exp(t)*sin(x - t + u) + u^3/(1 + x^2)")
    for _ in range(5):
        a, b = transform(rng), transform(rng)
        assert same(act_on_f(compose(a, b), f), act_on_f(a, act_on_f(b, f)))


# ---------------------------------------------------------------- prolongation


def test_prolongation_examples():
    p = prolong1(identity())
    assert p.Ut == var("u_t") and p.Ux == var("u_x")
    p = prolong1(EquivTransform(T=parse("t^2"), check=False))
    assert same(p.Ut, parse("u_t/(2*t)")) and same(p.Ux, var("u_x"))
    p = prolong1(shift(parse("t*x")))
    assert same(p.Ut, parse("u_t + x")) and same(p.Ux, parse("u_x + t"))


def test_contact_condition():
    assert contact_check(prolong1(identity()))
    rng = random.Random(5)
    for _ in range(10):
        assert contact_check(prolong1(transform(rng, need_inverse=False)))
    tr = EquivTransform(T=parse("2*t"), X=parse("x+1"), U0=parse("t^2"), check=False)
    good = prolong1(tr)
    assert not contact_check(ProlongedTransform(tr, var("u_x"), good.Ux))


# ---------------------------------------------------------------- literal


def test_transform_literal():
    tr = parse_transform("tr{T=exp(t); X=2*x; C=-1/2; U0=t*x; swap=true; Tinv=ln(t)}")
    assert tr.swap and tr.C == Fraction(-1, 2)
    assert tr.Xinv is not None and same(tr.Xinv, parse("x/2"))
    assert parse_transform(tr.literal()) == tr


@pytest.mark.parametrize("text", ["T=t", "tr{T=x}", "tr{C=t}", "tr{T=t; bogus=1}", "tr{T=t +}"])
def test_bad_transform_literals(text):
    with pytest.raises(ParseError):
        parse_transform(text)


# ---------------------------------------------------------------- discrete group


def test_discrete_group():
    g = discrete_group_table()
    assert g.order == 16
    assert len(g.center) == 4
    # D4 x Z2: identity, eleven involutions, four elements of order four
    assert g.order_histogram() == {1: 1, 2: 11, 4: 4}
    assert g.certificate
    swap = g.elements.index(((0, 1, 0), (1, 0, 0), (0, 0, 1)))
    ident = g.elements.index(((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert g.table[swap][swap] == ident
    tx = g.elements.index(((-1, 0, 0), (0, -1, 0), (0, 0, 1)))
    assert tx in g.center
    assert all(g.table[tx][j] == g.table[j][tx] for j in range(16))


# ---------------------------------------------------------------- properties


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_pushforward_is_functorial(seed):
    rng = random.Random(seed)
    a, b = transform(rng), transform(rng)
    q = properties.vector_field(rng)
    assert pushforward_vf(compose(a, b), q).equals(pushforward_vf(a, pushforward_vf(b, q)))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_closed_form_and_relational_actions_agree(seed):
    rng = random.Random(seed)
    tr = transform(rng)
    f = parse("exp(t)*F(x, u) + t*u^2")
    assert verify_map(f, tr, act_on_f(tr, f))


@settings(max_examples=5, deadline=None)
@given(seeds)
def test_symmetries_are_transported(seed):
    rng = random.Random(seed)
    rec = rng.choice(properties.finite_cases())
    assert properties.residual_equivariance(rng, rec.f_template, rec.generators, transforms=1)
