import random
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convlab.exactreal import LinearForm, MonomialSum, normalize
from convlab.pwfun import (
    Domain,
    DomainMismatch,
    EmptyRegion,
    NonIntegrable,
    OutOfDomain,
    ae_equal,
    ess_sup,
    evaluate,
    exp_piece,
    from_expr,
    indicator,
    l1_exact,
    l1_norm,
    linear_combine,
    multiply,
    power,
    rho,
    superlevel_measure,
    support_measure,
    value_at,
    values_on_grid,
    zero,
)

Q = Fraction
HALF = Domain.HALF_LINE
SQRT2 = LinearForm.symbol(1)


def pieces(f):
    return [(p.interval.lo_q, p.interval.hi_q, p.constant_value().as_rational()) for p in f.pieces]


# evaluate -------------------------------------------------------------------


def test_evaluate_indicator():
    assert value_at(indicator(0, Q(1, 2)), Q(1, 4)).as_rational() == 1


def test_evaluate_exp_at_left_endpoint():
    f = exp_piece(0, 1, 1, LinearForm.const(-1))
    e = evaluate(f, 0)
    assert e.is_exact() and e.lo == 1


def test_evaluate_exp_sqrt2_at_one():
    f = exp_piece(0, 1, 1, -SQRT2)
    e = evaluate(f, 1, 128)
    want = Fraction((-Decimal(2).sqrt()).exp())
    assert e.lo - Q(1, 10**50) <= want <= e.hi + Q(1, 10**50)


def test_evaluate_out_of_domain():
    with pytest.raises(OutOfDomain):
        evaluate(indicator(0, 1), Q(3, 2))
    with pytest.raises(OutOfDomain):
        evaluate(indicator(0, 1, domain=HALF), -1)
    with pytest.raises(OutOfDomain):
        indicator(0, 2)


# algebra --------------------------------------------------------------------


def test_combine_adjacent_halves():
    f = linear_combine(1, indicator(0, Q(1, 2)), 1, indicator(Q(1, 2), 1))
    assert pieces(f) == [(0, Q(1, 2), 1), (Q(1, 2), 1, 1)]


def test_combine_cancels():
    f = exp_piece(0, 1, 3, -SQRT2)
    assert linear_combine(1, f, -1, f).is_zero()


def test_combine_overlay():
    f = linear_combine(2, indicator(0, Q(3, 4)), 3, indicator(Q(1, 4), 1))
    assert pieces(f) == [(0, Q(1, 4), 2), (Q(1, 4), Q(3, 4), 5), (Q(3, 4), 1, 3)]


def test_combine_domain_mismatch():
    with pytest.raises(DomainMismatch):
        linear_combine(1, indicator(0, 1), 1, indicator(0, 1, domain=HALF))


def test_multiply_indicators():
    f = multiply(indicator(0, Q(1, 2)), indicator(Q(1, 4), 1))
    assert f == indicator(Q(1, 4), Q(1, 2))


def test_multiply_rates_add():
    c1, c2 = LinearForm.symbol(1, -1), LinearForm.symbol(2, -1)
    f = multiply(exp_piece(0, 1, 1, c1), exp_piece(0, 1, 1, c2))
    assert f == exp_piece(0, 1, 1, c1 + c2)
    assert multiply(f, zero()).is_zero()


def test_power_collapse_and_doubling():
    chi = indicator(Q(1, 3), Q(2, 3))
    assert power(chi, 5) == chi
    g = exp_piece(0, 1, 1, -SQRT2)
    assert power(g, 2) == exp_piece(0, 1, 1, SQRT2 * -2)
    assert power(g, 1) == g


def test_ae_equal_ignores_endpoints():
    a = indicator(0, Q(1, 2))
    b = linear_combine(1, indicator(0, Q(1, 4)), 1, indicator(Q(1, 4), Q(1, 2)))
    assert ae_equal(a, b)
    assert not ae_equal(a, indicator(0, Q(1, 3)))


# measures and norms -----------------------------------------------------------


def test_superlevel_indicator():
    m = superlevel_measure(indicator(0, Q(1, 2)), Q(1, 2))
    assert m.is_exact() and m.lo == Q(1, 2)


def test_superlevel_symbolic_crossing():
    f = exp_piece(0, 1, 1, LinearForm.const(-1))
    m = superlevel_measure(f, MonomialSum.exp(LinearForm.const(Q(-1, 2))))
    assert m.is_exact() and m.lo == Q(1, 2)


def test_superlevel_of_zero():
    assert superlevel_measure(zero(), Q(1, 100)).hi == 0


def test_superlevel_bisection_encloses_crossing():
    # 3 e^{-x} > 2 on [0, ln(3/2)]
    f = exp_piece(0, 1, 3, LinearForm.const(-1))
    m = superlevel_measure(f, 2, 128)
    want = Fraction(Decimal("1.5").ln())
    assert m.lo - Q(1, 10**30) <= want <= m.hi + Q(1, 10**30)
    assert m.width < Q(1, 2**40)


def test_l1_examples():
    assert l1_norm(indicator(0, 5, Q(1, 5), HALF)).lo == 1
    assert l1_norm(indicator(0, 5, Q(1, 5), HALF)).is_exact()
    # I_{4,3} = [7, 10]
    assert l1_norm(indicator(7, 10, Q(1, 3), HALF)).hi == 1
    f = exp_piece(0, None, 1, LinearForm.const(-1), HALF)
    assert l1_exact(f).as_rational() == 1


def test_l1_non_integrable():
    with pytest.raises(NonIntegrable):
        l1_norm(indicator(0, None, 1, HALF))
    with pytest.raises(NonIntegrable):
        l1_norm(exp_piece(0, None, 1, LinearForm.const(1), HALF))


def test_l1_sign_change():
    # 1 - 2 e^{-x} changes sign at ln 2; integral of |.| over [0,1]
    f = from_expr(0, 1, [(MonomialSum.const(1), LinearForm()), (MonomialSum.const(-2), LinearForm.const(-1))])
    e = l1_norm(f, 128)
    ln2, e1 = Decimal(2).ln(), Decimal(-1).exp()
    # closed form: int_0^ln2 (2e^{-x}-1) + int_ln2^1 (1-2e^{-x}) = (1 - ln2) + (1 - ln2 + 2e^{-1} - 1)
    want = Fraction((1 - ln2) + (1 - ln2) + 2 * e1 - 1)
    assert e.lo - Q(1, 10**30) <= want <= e.hi + Q(1, 10**30)


def test_ess_sup_examples():
    assert ess_sup(indicator(0, Q(1, 2))).lo == 1
    r7 = indicator(0, 7, Q(1, 7), HALF)
    s = ess_sup(r7)
    assert s.is_exact() and s.lo == Q(1, 7)
    s = ess_sup(exp_piece(0, 1, 1, -SQRT2))
    assert s.is_exact() and s.lo == 1


def test_ess_sup_interior_maximum():
    # x e^{-x}-like shape: e^{-x} - e^{-2x} peaks at x = ln 2 with value 1/4
    f = from_expr(
        0, 4, [(MonomialSum.const(1), LinearForm.const(-1)), (MonomialSum.const(-1), LinearForm.const(-2))], HALF
    )
    s = ess_sup(f, precision=128)
    assert s.lo <= Q(1, 4) <= s.hi
    assert s.width < Q(1, 2**40)


def test_ess_sup_empty_region():
    with pytest.raises(EmptyRegion):
        ess_sup(indicator(0, 1), [])


def test_rho_examples():
    half = indicator(0, Q(1, 2))
    assert rho(half, zero()).lo == Q(1, 4)
    assert rho(half, half).hi == 0
    r = rho(half, indicator(Q(1, 2), 1))
    assert r.is_exact() and r.lo == Q(1, 2)


def test_rho_exponential_against_closed_form():
    # rho(e^{-x} chi_[0,1], 0) = int_0^1 e^{-x}/(1+e^{-x}) = ln 2 - ln(1 + e^{-1})
    f = exp_piece(0, 1, 1, LinearForm.const(-1))
    r = rho(f, zero(), 128)
    want = Fraction(Decimal(2).ln() - (1 + Decimal(-1).exp()).ln())
    assert r.lo - Q(1, 10**30) <= want <= r.hi + Q(1, 10**30)


def test_rho_two_term_quadrature():
    f = from_expr(0, 1, [(MonomialSum.const(1), LinearForm.const(-1)), (MonomialSum.const(1), LinearForm.const(-2))])
    r = rho(f, zero(), 64)
    # numeric oracle: composite Simpson with 2000 panels in decimal
    n, h = 2000, Decimal(1) / 2000
    g = lambda x: (u := (-x).exp() + (-2 * x).exp()) / (1 + u)  # noqa: E731
    s = g(Decimal(0)) + g(Decimal(1)) + sum((4 if i % 2 else 2) * g(i * h) for i in range(1, n))
    want = Fraction(s * h / 3)
    assert r.lo - Q(1, 10**12) <= want <= r.hi + Q(1, 10**12)
    assert r.width < Q(1, 2**20)


def test_values_on_grid_matches_value_at():
    f = linear_combine(2, indicator(0, Q(3, 4)), -1, exp_piece(Q(1, 4), 1, 1, -SQRT2))
    xs = [Q(k, 10) for k in range(11)]
    got = values_on_grid(f, xs)
    for i, x in enumerate(xs):
        want = value_at(f, x)
        assert normalize(got.get(i, MonomialSum())) == normalize(want)


# properties ---------------------------------------------------------------------


def rand_step(rng, den=16, k=4):
    f = zero()
    for _ in range(rng.randint(0, k)):
        a, b = sorted(Q(rng.randint(0, den), den) for _ in range(2))
        if a < b:
            f = linear_combine(1, f, Q(rng.randint(-4, 4), rng.randint(1, 3)), indicator(a, b))
    return f


def rand_exp(rng):
    f = zero()
    for _ in range(rng.randint(1, 3)):
        a, b = sorted(Q(rng.randint(0, 8), 8) for _ in range(2))
        if a < b:
            rate = LinearForm.symbol(rng.randint(0, 3), rng.randint(-2, 2))
            f = linear_combine(1, f, rng.randint(-3, 3), exp_piece(a, b, 1, rate))
    return f


def _disjoint(f):
    for a, b in zip(f.pieces, f.pieces[1:]):
        assert a.interval.hi_q <= b.interval.lo_q


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_canonical_and_pointwise_agreement(seed):
    rng = random.Random(seed)
    f, g = rand_exp(rng), rand_exp(rng)
    a, b = rng.randint(-3, 3), rng.randint(-3, 3)
    h = linear_combine(a, f, b, g)
    p = multiply(h, f)
    for r in (h, p):
        _disjoint(r)
    for _ in range(100):
        x = Q(rng.randint(0, 97), 97)  # never a breakpoint
        fx, gx = value_at(f, x), value_at(g, x)
        assert normalize(value_at(h, x)) == normalize(fx * a + gx * b)
        assert normalize(value_at(p, x)) == normalize((fx * a + gx * b) * fx)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 24), min_size=2, max_size=8, unique=True), st.integers(1, 6))
def test_indicator_power_collapse(cuts, m):
    cuts = sorted(Q(c, 24) for c in cuts)
    f = zero()
    for a, b in zip(cuts[::2], cuts[1::2]):
        f = linear_combine(1, f, 1, indicator(a, b))
    assert all(p.is_indicator() for p in f.pieces)
    assert power(f, m) == f


def test_rho_metric_axioms():
    rng = random.Random(3)
    for _ in range(100):
        f, g, h = rand_step(rng), rand_step(rng), rand_step(rng)
        fg, gf = rho(f, g), rho(g, f)
        assert fg.is_exact() and fg.lo == gf.lo
        assert rho(f, h).lo <= fg.lo + rho(g, h).lo
        zero_support = support_measure(linear_combine(1, f, -1, g)).as_rational() == 0
        assert (fg.lo == 0) == zero_support


def test_l1_scales_on_sign_constant():
    rng = random.Random(5)
    for _ in range(50):
        a, b = sorted(Q(rng.randint(0, 8), 8) for _ in range(2))
        if a == b:
            continue
        f = linear_combine(1, indicator(a, b, rng.randint(1, 5)), 1, exp_piece(a, b, 1, -SQRT2))
        s = Q(rng.randint(-5, 5) or 1, rng.randint(1, 4))
        lhs, rhs = l1_norm(linear_combine(s, f, 0, zero()), 128), l1_norm(f, 128).scale(abs(s))
        assert lhs.overlaps(rhs)
    g = indicator(Q(1, 8), Q(5, 8), 3)
    assert l1_norm(linear_combine(Q(-2, 3), g, 0, zero())).lo == Q(2, 3) * l1_norm(g).lo


def test_superlevel_antitone():
    rng = random.Random(9)
    for _ in range(30):
        f = rand_exp(rng)
        eps = sorted(Q(rng.randint(1, 400), 100) for _ in range(10))
        ms = [superlevel_measure(f, e, 64) for e in eps]
        for m1, m2 in zip(ms, ms[1:]):
            assert m1.hi >= m2.lo
