import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convlab import witnesses as W
from convlab.exactreal import MonomialSum
from convlab.pwfun import Domain, DomainMismatch, OutOfDomain, ess_sup, indicator, interval, l1_norm
from convlab.seqmodes import (
    AuditFailure,
    ClosedForm,
    CustomLimsup,
    EventuallyAvoids,
    FunSeq,
    HypothesisViolated,
    Limit,
    Membership,
    Mode,
    ShrinksToNull,
    Status,
    StructuredSetSeq,
    SweepsAll,
    audit,
    check_almost_uniform,
    check_in_measure,
    check_indicator_dichotomy,
    check_l1,
    check_pointwise,
    check_uniform,
    d_metric,
    dichotomy_oracle,
    limsup_is_empty,
    limsup_is_null,
    limsup_membership,
    truncate,
    zero_seq,
)

Q = Fraction
HALF = Domain.HALF_LINE


def const_seq():
    return FunSeq("chi[0,1]", Domain.UNIT, lambda n: indicator(0, 1))


def inv_seq():
    return FunSeq("chi[0,1]/n", Domain.UNIT, lambda n: indicator(0, 1, Q(1, n)))


def shrink_sets():
    return StructuredSetSeq(Domain.UNIT, lambda n: (W.shrink_set(n),), ShrinksToNull(lambda n: Q(1, n)))


# product metric ----------------------------------------------------------------


def test_d_metric_self():
    T = W.typewriter_seq()
    D = d_metric(T, T, 7)
    assert D.lo == 0 and D.hi == Q(1, 2**7)


def test_d_metric_typewriter_vs_zero():
    D = d_metric(W.typewriter_seq(), zero_seq(), 2)
    assert D.lo == Q(13, 60) and D.hi == Q(13, 60) + Q(1, 4)


def test_d_metric_symmetric():
    a, b = W.typewriter_seq(), W.shrink_seq()
    assert d_metric(a, b, 12, 64).overlaps(d_metric(b, a, 12, 64))


def test_d_metric_errors():
    with pytest.raises(DomainMismatch):
        d_metric(W.typewriter_seq(), W.flat_bump_seq(), 3)
    with pytest.raises(ValueError):
        d_metric(W.typewriter_seq(), zero_seq(), 0)


def test_d_metric_half_line():
    D = d_metric(W.flat_bump_seq(), zero_seq(HALF), 6, 64)
    assert 0 < D.lo <= D.hi


# in measure --------------------------------------------------------------------


def test_in_measure_typewriter():
    v = check_in_measure(W.typewriter_seq())
    assert v.status is Status.CERTIFIED_CONVERGES
    assert "2^-floor(log2 n)" in v.certificate


def test_in_measure_constant_counterexample():
    v = check_in_measure(const_seq(), [Q(1, 2)], horizon=64)
    assert v.status is Status.COUNTEREXAMPLE_AT and v.index == 64
    assert dict(v.details)["measure"] == "1"


def test_in_measure_nup_witness():
    assert check_in_measure(W.nup_gen_seq(1)).status is Status.CERTIFIED_CONVERGES


def test_in_measure_needs_positive_eps():
    with pytest.raises(ValueError):
        check_in_measure(const_seq(), [0])


def test_in_measure_horizon_evidence():
    v = check_in_measure(inv_seq(), [Q(1, 8)], horizon=64)
    assert v.status is Status.NO_COUNTEREXAMPLE_UP_TO and v.horizon == 64


# pointwise -----------------------------------------------------------------------


def test_pointwise_typewriter_third():
    v = check_pointwise(W.typewriter_seq(), [Q(1, 3)])
    assert v.status is Status.CERTIFIED_DIVERGES


def test_pointwise_shrink():
    v = check_pointwise(W.shrink_seq(), [Q(1, 7), Q(1, 2), Q(9, 10)])
    assert v.status is Status.CERTIFIED_CONVERGES


def test_pointwise_inverse_trend():
    v = check_pointwise(inv_seq(), [Q(1, 2)], horizon=128)
    assert v.status is Status.NO_COUNTEREXAMPLE_UP_TO and v.horizon == 128


def test_pointwise_constant_has_no_counterexample_but_not_certified():
    v = check_pointwise(const_seq(), [Q(1, 2)], horizon=32)
    assert not v.certified


def test_pointwise_out_of_domain():
    with pytest.raises(OutOfDomain):
        check_pointwise(W.typewriter_seq(), [Q(3, 2)])


# limsup --------------------------------------------------------------------------


def test_limsup_membership_examples():
    T = W.typewriter_seq().support
    assert limsup_membership(T, Q(2, 7)) is Membership.IN_LIMSUP
    assert limsup_membership(shrink_sets(), Q(1, 2)) is Membership.NOT_IN_LIMSUP
    full = StructuredSetSeq(Domain.UNIT, lambda n: (interval(0, 1),), SweepsAll(misses_all=False))
    assert limsup_membership(full, 0) is Membership.IN_LIMSUP


def test_limsup_custom_and_avoid():
    pt = StructuredSetSeq(Domain.UNIT, lambda n: (interval(Q(1, 4), Q(1, 4)),), CustomLimsup(points=(Q(1, 4),)))
    assert limsup_membership(pt, Q(1, 4)) is Membership.IN_LIMSUP
    assert limsup_membership(pt, Q(1, 3)) is Membership.NOT_IN_LIMSUP
    assert limsup_is_empty(pt) is False and limsup_is_null(pt) is True
    partial = StructuredSetSeq(Domain.UNIT, lambda n: (), CustomLimsup(covers=(interval(0, Q(1, 2)),)))
    assert limsup_membership(partial, Q(3, 4)) is Membership.UNKNOWN
    avoid = StructuredSetSeq(
        Domain.UNIT, lambda n: (interval(Q(1, 2) + Q(1, n + 2), 1),), EventuallyAvoids((interval(0, Q(1, 2)),))
    )
    assert limsup_membership(avoid, Q(1, 2)) is Membership.NOT_IN_LIMSUP
    assert limsup_membership(avoid, Q(3, 4)) is Membership.IN_LIMSUP
    assert limsup_is_empty(avoid) is False and limsup_is_null(avoid) is False
    assert limsup_is_empty(shrink_sets()) is True


# dichotomy -----------------------------------------------------------------------


def one(n):
    return MonomialSum.const(1)


def inv(n):
    return MonomialSum.const(Q(1, n))


def test_dichotomy_examples():
    S = shrink_sets()
    assert check_indicator_dichotomy(one, S, Mode.POINTWISE).status is Status.CERTIFIED_CONVERGES
    assert check_indicator_dichotomy(one, S, "uniform").status is Status.CERTIFIED_DIVERGES
    full = StructuredSetSeq(Domain.UNIT, lambda n: (interval(0, 1),), SweepsAll(misses_all=False))
    v = check_indicator_dichotomy(inv, full, Mode.UNIFORM)
    assert v.status is Status.CERTIFIED_CONVERGES and dict(v.details)["agrees"]


def test_dichotomy_ae_versus_pointwise():
    # alpha = 1 on {1/2}: converges a.e. but not everywhere
    pt = StructuredSetSeq(Domain.UNIT, lambda n: (interval(Q(1, 2), Q(1, 2)),), CustomLimsup(points=(Q(1, 2),)))
    assert check_indicator_dichotomy(one, pt, Mode.AE).status is Status.CERTIFIED_CONVERGES
    assert check_indicator_dichotomy(one, pt, Mode.POINTWISE).status is Status.CERTIFIED_DIVERGES
    assert dichotomy_oracle(one, pt, 256) == {Mode.POINTWISE: False, Mode.AE: True, Mode.UNIFORM: False}


def test_dichotomy_hypotheses():
    S = shrink_sets()
    mixed = lambda n: MonomialSum.const(1 if n % 2 else Q(1, n))  # noqa: E731
    with pytest.raises(HypothesisViolated):
        check_indicator_dichotomy(mixed, S, Mode.UNIFORM, horizon=256)
    vanish = lambda n: MonomialSum.const(0 if n == 5 else 1)  # noqa: E731
    with pytest.raises(HypothesisViolated):
        check_indicator_dichotomy(vanish, S, Mode.UNIFORM, horizon=256)


# uniform, almost uniform, L1 ------------------------------------------------------


def test_uniform_examples():
    v = check_uniform(W.nup_gen_seq(1))
    assert v.status is Status.CERTIFIED_DIVERGES
    assert check_uniform(W.l1_gen_seq(1)).status is Status.CERTIFIED_CONVERGES
    assert check_uniform(W.traveling_bump_seq(3)).status is Status.CERTIFIED_CONVERGES


def test_uniform_horizon_fallback():
    v = check_uniform(const_seq(), horizon=16)
    assert v.status is Status.COUNTEREXAMPLE_AT
    assert check_uniform(inv_seq(), horizon=256).status is Status.NO_COUNTEREXAMPLE_UP_TO


def test_almost_uniform_examples():
    v = check_almost_uniform(W.nup_gen_seq(1), Q(1, 10))
    assert v.status is Status.CERTIFIED_CONVERGES
    assert dict(v.details) == {"E": "[0, 1/20]", "n0": 20}
    v = check_almost_uniform(W.typewriter_seq(), Q(1, 10), horizon=256)
    assert v.status is Status.COUNTEREXAMPLE_AT
    v = check_almost_uniform(zero_seq(), Q(1, 10))
    assert v.status is Status.CERTIFIED_CONVERGES and dict(v.details)["E"] == "[]"


def test_almost_uniform_domain_and_eps():
    with pytest.raises(DomainMismatch):
        check_almost_uniform(W.flat_bump_seq(), Q(1, 10))
    with pytest.raises(ValueError):
        check_almost_uniform(zero_seq(), 0)


def test_l1_examples():
    assert check_l1(W.flat_bump_seq()).status is Status.CERTIFIED_DIVERGES
    assert check_l1(W.l1_gen_seq(1)).status is Status.CERTIFIED_DIVERGES
    F = FunSeq(
        "chi[0,n]/n^2",
        HALF,
        lambda n: indicator(0, n, Q(1, n * n), HALF),
        l1=ClosedForm(lambda n: MonomialSum.const(Q(1, n)), Limit.ZERO, "1/n"),
    )
    audit(F, 16)
    assert check_l1(F).status is Status.CERTIFIED_CONVERGES


def test_audit_rejects_wrong_metadata():
    bad = FunSeq(
        "bad",
        Domain.UNIT,
        lambda n: indicator(0, 1),
        sup_norm=ClosedForm(lambda n: MonomialSum.const(2), Limit.NOT_ZERO, "2"),
    )
    with pytest.raises(AuditFailure):
        audit(bad, 4)
    with pytest.raises(ValueError):
        bad(0)


# truncation -----------------------------------------------------------------------


def test_truncate_examples():
    t = truncate(W.typewriter_seq(), 3)
    assert t(4).is_zero() and t(3) == W.typewriter(3)
    assert d_metric(W.typewriter_seq(), truncate(W.typewriter_seq(), 10), 20, 64).hi <= Q(1, 2**10)
    z = truncate(zero_seq(), 5)
    assert all(z(n).is_zero() for n in range(1, 12))
    with pytest.raises(ValueError):
        truncate(zero_seq(), -1)


# properties -------------------------------------------------------------------------


@pytest.mark.parametrize("fam", [str(s) for s in W.catalog()])
def test_certificates_sound_to_64(fam):
    F = W.build(fam)
    audit(F, 64)


@pytest.mark.parametrize("fam", [str(s) for s in W.catalog()])
def test_mode_hierarchy(fam):
    F = W.build(fam)
    if check_uniform(F).status is not Status.CERTIFIED_CONVERGES:
        return
    if F.domain is Domain.UNIT:
        assert check_almost_uniform(F, Q(1, 10)).says_converges
        assert check_in_measure(F).says_converges
        xs = [Q(k, 16) for k in range(17)]
    else:
        xs = [Q(k, 2) for k in range(17)]
    v = check_pointwise(F, xs, 256)
    assert v.status not in (Status.CERTIFIED_DIVERGES, Status.COUNTEREXAMPLE_AT)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 20), st.integers(0, 10**6))
def test_d_metric_tail_width(N, seed):
    rng = random.Random(seed)
    fams = [W.typewriter_seq(), W.shrink_seq(), zero_seq(), W.typewriter_split_seq(rng.randint(1, 3))]
    F, G = rng.choice(fams), rng.choice(fams)
    D = d_metric(F, G, N, 64)
    assert D.hi - D.lo == Q(1, 2**N)
    ref = d_metric(F, G, 20, 64)
    assert D.lo <= ref.lo and ref.hi <= D.hi


def test_verdict_sup_matches_direct_computation():
    F = W.nup_gen_seq(2)
    for n in (1, 5, 64):
        assert F.sup_norm.enclosure(n, 128).overlaps(ess_sup(F(n), precision=128))
    G = W.traveling_bump_seq(2)
    for n in (1, 7, 64):
        assert G.l1.enclosure(n).overlaps(l1_norm(G(n)))
