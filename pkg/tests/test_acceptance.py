"""One test per acceptance criterion (AC1..AC11)."""

import random
from decimal import Decimal
from fractions import Fraction

from convlab import freealg as FA
from convlab import witnesses as W
from convlab.exactreal import (
    LinearForm,
    MonomialSum,
    ZeroStatus,
    eval_enclosure,
    log_enclosure,
)
from convlab.harness.scenarios import random_dichotomy_instance
from convlab.pwfun import (
    ess_sup,
    indicator,
    interval,
    l1_norm,
    linear_combine,
    rho,
    support_measure,
    value_at,
    zero,
)
from convlab.seqmodes import (
    Mode,
    Status,
    check_almost_uniform,
    check_in_measure,
    check_indicator_dichotomy,
    check_pointwise,
    check_uniform,
    d_metric,
    dichotomy_oracle,
    truncate,
    value_counts,
    zero_seq,
)

SEED = 20240917
ONE, NIL = MonomialSum.const(1), MonomialSum()


def _floor_log2(n):
    k = 0
    while 2 ** (k + 1) <= n:
        k += 1
    return k


def test_ac01_typewriter_measure_law():
    for n in range(1, 2**16 + 1):
        assert support_measure(W.typewriter(n)).as_rational() == Fraction(1, 2 ** _floor_log2(n)), n
    v = check_in_measure(W.typewriter_seq(), [Fraction(1, 8), Fraction(1, 64)])
    assert v.status is Status.CERTIFIED_CONVERGES


def test_ac02_typewriter_pointwise_divergence():
    xs = [Fraction(k, 256) for k in range(257)]
    T = W.typewriter_seq()
    counts = value_counts(T, xs, 2**14)
    for x, c in zip(xs, counts):
        assert c[ONE] >= 10 and c[NIL] >= 10, x
    v = check_pointwise(T, xs, 2**14)
    assert v.status is Status.CERTIFIED_DIVERGES
    assert len(v.details) == 257
    for _, d in v.details:
        assert d.status is Status.CERTIFIED_DIVERGES
        assert "infinitely many supports" in d.certificate
    assert type(T.support.descriptor).__name__ == "SweepsAll"


def test_ac03_algebra_collapse():
    rng = random.Random(SEED)
    zeros = 0
    for _ in range(200):
        P = FA.random_poly(rng)
        assert P.N <= 3 and P.degree <= 4
        c = FA.random_symbols(rng, P.N)
        for n in range(1, 65):
            col = FA.apply_polynomial(P, "measure-gen", c, n)
            assert col.to_pwfun() == FA.expand_polynomial(P, "measure-gen", c, n), (str(P), c, n)
        z = FA.phi(c, P).certify_nonzero()
        zeros += z.status is ZeroStatus.CERTIFIED_ZERO
        assert z.status is ZeroStatus.CERTIFIED_NONZERO
    assert zeros == 0


def test_ac04_nup_sup_invariance():
    rng = random.Random(SEED)
    tol = Fraction(1, 10**12)
    for _ in range(50):
        P = FA.random_poly(rng)
        c = FA.random_symbols(rng, P.N)
        s = FA.phi(c, P).sup_abs(256)
        for n in (1, 2, 5, 10, 100):
            f = FA.apply_polynomial(P, "nup-gen", c, n).to_pwfun()
            e = ess_sup(f, [interval(Fraction(1, n + 1), Fraction(1, n))], 256)
            assert e.overlaps(s), (str(P), n)
            assert e.width + s.width < tol


def _check_witnesses(family, cert, k_max):
    members = [family(k) for k in range(1, k_max + 1)]
    for k, n, x in cert.witnesses:
        assert not value_at(members[k - 1](n), x).is_zero()
        for j, G in enumerate(members, start=1):
            if j != k:
                assert value_at(G(n), x).is_zero()


def test_ac05_independence_ranks():
    for family in (W.typewriter_split_seq, W.shrink_split_seq, W.traveling_bump_seq):
        cert = FA.independence_rank(family, 20)
        assert cert.rank == 20
        assert sorted(k for k, _, _ in cert.witnesses) == list(range(1, 21))
        _check_witnesses(family, cert, 20)


def test_ac06_interleaving():
    def oracle(i):
        k = 1
        while i % 2 == 0:
            i //= 2
            k += 1
        return k, (i + 1) // 2

    seen = {}
    for k in range(1, 65):
        for n in range(1, 65):
            i = W.interleave_index(k, n)
            assert i not in seen
            seen[i] = (k, n)
            if n > 1:
                assert W.interleave_index(k, n - 1) < i
            if k > 1:
                assert W.interleave_index(k - 1, n) < i
    for i in range(1, 65):
        assert seen[i] == oracle(i)
    assert sorted(i for i in seen if i <= 64) == list(range(1, 65))


def test_ac07_dichotomy_oracle():
    rng = random.Random(SEED)
    for i in range(500):
        inst = random_dichotomy_instance(rng)
        brute = dichotomy_oracle(inst.alpha, inst.sets, 2**12)
        for mode in Mode:
            v = check_indicator_dichotomy(inst.alpha, inst.sets, mode, 2**12)
            assert v.certified
            assert (v.status is Status.CERTIFIED_CONVERGES) == brute[mode], (i, inst.alpha_label, inst.sets_label, mode)
            if mode is Mode.UNIFORM:
                assert (v.status is Status.CERTIFIED_CONVERGES) == inst.alpha_to_zero


def _first_log_norm_above(limit):
    r2 = Decimal(2).sqrt()
    n = 2
    while Decimal(n) - r2 * Decimal(n).ln() <= limit:
        n += 1
    return n


def _first_sup_below(limit):
    r2 = Decimal(2).sqrt()
    n = 1
    while (-r2 * Decimal(n).ln()).exp() >= limit:
        n += 1
    return n


def test_ac08_l1_gen_divergence():
    # oracle values, recomputed here with decimal
    assert _first_log_norm_above(100) == 107
    assert _first_sup_below(Decimal("0.001")) == 133

    c = LinearForm.symbol(1, -1)  # exponent -sqrt2
    prev, first = None, None
    for n in range(2, 10**4 + 1):
        e = log_enclosure(MonomialSum.exp(LinearForm.const(n)) * MonomialSum.power(n, c), 256)
        if prev is not None:
            assert prev.hi < e.lo, n
        if first is None and e.lo > 100:
            first = n
        prev = e
    assert first is not None and first <= 110
    assert first == 107

    prev, first = None, None
    for n in range(2, 200):
        e = eval_enclosure(MonomialSum.power(n, c), 256)
        if prev is not None:
            assert e.hi < prev.lo, n
        if first is None and e.hi < Fraction(1, 1000):
            first = n
        prev = e
    assert first == 133


def test_ac09_bump_exactness():
    for k in range(1, 101):
        for n in range(1, 101):
            f = W.traveling_bump(k, n)
            l1, sup = l1_norm(f), ess_sup(f)
            assert l1.is_exact() and l1.lo == 1
            assert sup.is_exact() and sup.lo == Fraction(1, n)
    blocks = sorted((W.block_interval(N, M) for N in range(1, 51) for M in range(1, N + 1)), key=lambda iv: iv.lo_q)
    total = sum(N * (N + 1) // 2 for N in range(1, 51))
    assert blocks[0].lo_q == 0 and blocks[-1].hi_q == total
    for a, b in zip(blocks, blocks[1:]):
        assert a.hi_q == b.lo_q
    assert sum(iv.hi_q - iv.lo_q for iv in blocks) == total


def _step(rng):
    f = zero()
    for _ in range(rng.randint(0, 4)):
        a, b = sorted(Fraction(rng.randint(0, 16), 16) for _ in range(2))
        if a < b:
            f = linear_combine(1, f, Fraction(rng.randint(-4, 4), rng.randint(1, 3)), indicator(a, b))
    return f


def test_ac10_metric_suite():
    rng = random.Random(SEED)
    for _ in range(100):
        f, g, h = _step(rng), _step(rng), _step(rng)
        fg, gf, gh, fh = rho(f, g), rho(g, f), rho(g, h), rho(f, h)
        for e in (fg, gf, gh, fh):
            assert e.is_exact()
        assert fg.lo == gf.lo
        assert fh.lo <= fg.lo + gh.lo
        diff = linear_combine(1, f, -1, g)
        assert (fg.lo == 0) == (support_measure(diff).as_rational() == 0)

    T = W.typewriter_seq()
    pairs = [(T, zero_seq()), (T, T), (T, W.typewriter_split_seq(2)), (W.shrink_seq(), T)]
    for F, G in pairs:
        ref = d_metric(F, G, 20, 64)
        for N in range(1, 21):
            D = d_metric(F, G, N, 64)
            assert D.hi - D.lo == Fraction(1, 2**N)
            assert D.lo <= ref.lo and ref.hi <= D.hi

    delta = Fraction(1, 2**10)
    for fam in W.catalog():
        F = W.build(fam)
        assert d_metric(F, truncate(F, 10), 20, 64).hi < delta, str(fam)


def test_ac11_nup_conditions():
    rng = random.Random(SEED)
    xs = [Fraction(k, 64) for k in range(65)]
    seqs = [W.nup_gen_seq(1), W.nup_gen_seq(3)]
    seqs.append(FA.poly_seq(FA.MultiIndexPoly.of(2, {(1, 0): 2, (0, 1): -3}), "nup-gen", (1, 2)))
    for _ in range(4):
        P = FA.random_poly(rng)
        seqs.append(FA.poly_seq(P, "nup-gen", FA.random_symbols(rng, P.N)))
    for F in seqs:
        assert check_pointwise(F, xs, 256).status is Status.CERTIFIED_CONVERGES, F.name
        for eps in (Fraction(1, 10), Fraction(1, 100)):
            v = check_almost_uniform(F, eps)
            assert v.status is Status.CERTIFIED_CONVERGES, F.name
            E = dict(v.details)
            delta = Fraction(E["E"].strip("[]").split(",")[1])
            assert delta < eps
            n0 = E["n0"]
            for n in range(n0, n0 + 40):
                assert ess_sup(F(n), [interval(delta, 1)], 64).hi == 0
        assert check_uniform(F).status is Status.CERTIFIED_DIVERGES, F.name
