"""The eight verification scenarios.

Each scenario turns the computable content of one result into a list of
named checks.  Everything is deterministic given the parameters and seed.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .. import freealg as FA
from .. import witnesses as W
from ..exactreal import (
    LinearForm,
    MonomialSum,
    ZeroStatus,
    eval_enclosure,
    log_enclosure,
)
from ..pwfun import Domain, Interval, _pt_cmp, ess_sup, interval, l1_norm, support_measure
from ..seqmodes import (
    CustomLimsup,
    EventuallyAvoids,
    HypothesisViolated,
    Mode,
    ShrinksToNull,
    Status,
    StructuredSetSeq,
    SweepsAll,
    check_almost_uniform,
    check_in_measure,
    check_indicator_dichotomy,
    check_l1,
    check_pointwise,
    check_uniform,
    d_metric,
    truncate,
    value_counts,
    zero_seq,
)
from .report import FAIL, INDETERMINATE, PASS, Check, ScenarioParams, ScenarioReport, default_precision


class UnknownScenario(KeyError):
    pass


def _check(name: str, claim: str, ok: bool | None, certificate: str, **payload) -> Check:
    status = INDETERMINATE if ok is None else (PASS if ok else FAIL)
    return Check(name, claim, status, certificate, {k: _plain(v) for k, v in payload.items()})


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (int, str, bool)) or v is None:
        return v
    return str(v)


def _grid(samples: int) -> list[Fraction]:
    if samples == 1:
        return [Fraction(0)]
    return [Fraction(k, samples - 1) for k in range(samples)]


# ---------------------------------------------------------------------------
# random dichotomy instances: alpha_n * chi_{E_n}


@dataclass(frozen=True)
class DichotomyInstance:
    alpha_label: str
    alpha: Callable[[int], MonomialSum]
    alpha_to_zero: bool
    sets_label: str
    sets: StructuredSetSeq


def _q(x) -> MonomialSum:
    return MonomialSum.const(Fraction(x))


# label, alpha, alpha_n -> 0; built once so the oracle caches are shared across instances
ALPHAS: tuple[tuple[str, Callable[[int], MonomialSum], bool], ...] = tuple(
    (label, lru_cache(maxsize=None)(fn), to_zero)
    for label, fn, to_zero in [
        ("1", lambda n: _q(1), False),
        ("1/n", lambda n: _q(Fraction(1, n)), True),
        ("(-1)^n", lambda n: _q((-1) ** n), False),
        ("2 + 1/n", lambda n: _q(2 + Fraction(1, n)), False),
        ("1/n^2", lambda n: _q(Fraction(1, n * n)), True),
        ("3/(n+1)", lambda n: _q(Fraction(3, n + 1)), True),
        ("(-1)^n/2", lambda n: _q(Fraction((-1) ** n, 2)), False),
        ("e^(-sqrt2 n)", lambda n: MonomialSum.exp(LinearForm.symbol(1, -n)), True),
        ("n^(-sqrt3)", lambda n: MonomialSum.power(n, LinearForm.symbol(2, -1)) if n > 1 else _q(1), True),
    ]
)


def _iv(lo, hi, lo_closed=True, hi_closed=True) -> Interval:
    return Interval(_q(lo), _q(hi), lo_closed, hi_closed)


def _sets(gen: Callable[[int], tuple[Interval, ...]], descriptor) -> StructuredSetSeq:
    return StructuredSetSeq(Domain.UNIT, lru_cache(maxsize=None)(gen), descriptor)


@lru_cache(maxsize=None)
def _fixed_block(a: Fraction, b: Fraction) -> StructuredSetSeq:
    avoid = []
    if a > 0:
        avoid.append(_iv(0, a, True, False))
    if b < 1:
        avoid.append(_iv(b, 1, False, True))
    block = (interval(a, b),)
    return _sets(lambda n: block, EventuallyAvoids(tuple(avoid)))


@lru_cache(maxsize=None)
def _point(pt: Fraction) -> StructuredSetSeq:
    return _sets(lambda n: (interval(pt, pt),), CustomLimsup(points=(pt,)))


_HALVES = (interval(0, Fraction(1, 2)),), (interval(Fraction(1, 2), 1),)

_FIXED_SETS = {
    0: ("typewriter windows", _sets(lambda n: (W.typewriter_window(n),), SweepsAll(True))),
    1: ("[1/(n+1), 1/n]", _sets(lambda n: (W.shrink_set(n),), ShrinksToNull(lambda n: Fraction(1, n)))),
    2: ("[0, 1/n]", _sets(lambda n: (interval(0, Fraction(1, n)),), ShrinksToNull(lambda n: Fraction(1, n), True))),
    4: ("[0,1/2] and [1/2,1] alternating", _sets(lambda n: _HALVES[n % 2], SweepsAll(misses_all=False))),
    5: (
        "[1/2 + 1/(n+2), 1]",
        _sets(
            lambda n: (interval(Fraction(1, 2) + Fraction(1, n + 2), 1),),
            EventuallyAvoids((interval(0, Fraction(1, 2)),)),
        ),
    ),
    7: (
        "[1/2, 1/2 + 1/(n+1)]",
        _sets(
            lambda n: (interval(Fraction(1, 2), Fraction(1, 2) + Fraction(1, n + 1)),),
            CustomLimsup(points=(Fraction(1, 2),)),
        ),
    ),
}


def _random_sets(rng: random.Random) -> tuple[str, StructuredSetSeq]:
    choice = rng.randrange(8)
    if choice == 3:
        a = rng.choice([Fraction(0), Fraction(1, 4), Fraction(1, 3)])
        b = rng.choice([Fraction(1, 2), Fraction(2, 3), Fraction(1)])
        return f"[{a}, {b}] for all n", _fixed_block(a, b)
    if choice == 6:
        pt = rng.choice([Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
        return f"{{{pt}}}", _point(pt)
    return _FIXED_SETS[choice]


def random_dichotomy_instance(rng: random.Random) -> DichotomyInstance:
    label, alpha, to_zero = rng.choice(ALPHAS)
    sets_label, sets = _random_sets(rng)
    return DichotomyInstance(label, alpha, to_zero, sets_label, sets)


# ---------------------------------------------------------------------------
# scenarios


def _thm_2_2(p: ScenarioParams) -> list[Check]:
    out = []
    bad = [n for n in range(1, p.horizon + 1)
           if support_measure(W.typewriter(n)).as_rational() != Fraction(1, 2 ** (n.bit_length() - 1))]
    out.append(_check(
        "typewriter-measure-law", "m{T_n != 0} = 2^-floor(log2 n)", not bad,
        f"exact for n <= {p.horizon}" if not bad else f"mismatch at n = {bad[:5]}", first_bad=bad[:5],
    ))
    T = W.typewriter_seq()
    v = check_in_measure(T, p.eps_values(), p.horizon)
    out.append(_check("typewriter-in-measure", "the typewriter sequence converges to 0 in measure",
                      v.status is Status.CERTIFIED_CONVERGES, str(v)))

    xs = _grid(p.samples)
    v = check_pointwise(T, xs, p.horizon)
    every = all(d.status is Status.CERTIFIED_DIVERGES for _, d in v.details)
    counts = value_counts(T, xs, p.horizon)
    one, nil = MonomialSum.const(1), MonomialSum()
    min_one = min(c[one] for c in counts)
    min_nil = min(c[nil] for c in counts)
    out.append(_check(
        "typewriter-pointwise-divergence", "the typewriter sequence converges at no point of [0,1]",
        v.status is Status.CERTIFIED_DIVERGES and every and min_one >= 10 and min_nil >= 10,
        f"{v.status.value} at all {len(xs)} points; up to n = {p.horizon} every point sees 1 at least "
        f"{min_one} times and 0 at least {min_nil} times",
        min_hits_one=min_one, min_hits_zero=min_nil,
    ))

    rng = random.Random(p.seed)
    mismatches, zeros, nonzero = [], 0, 0
    ns = list(range(1, 9)) + [64]
    polys = []
    for i in range(p.polys):
        P = FA.random_poly(rng)
        c = FA.random_symbols(rng, P.N)
        polys.append((P, c))
        for n in ns:
            if FA.apply_polynomial(P, "measure-gen", c, n).to_pwfun() != FA.expand_polynomial(P, "measure-gen", c, n):
                mismatches.append((i, n))
        z = FA.phi(c, P).certify_nonzero()
        zeros += z.status is ZeroStatus.CERTIFIED_ZERO
        nonzero += z.status is ZeroStatus.CERTIFIED_NONZERO
    out.append(_check(
        "algebra-collapse", "P(F(c_1,n),...,F(c_N,n)) = phi_{c,J}(x) T_n(x) for polynomials without constant term",
        not mismatches, f"{p.polys} random polynomials, n in {ns}: collapsed form equals brute-force expansion",
        mismatches=mismatches[:5],
    ))
    out.append(_check(
        "algebra-free", "phi_{c,J} is never the zero function", zeros == 0 and nonzero == p.polys,
        f"{nonzero}/{p.polys} certified nonzero, {zeros} certified zero", certified_zero=zeros,
    ))

    bad = []
    for P, c in polys[: min(len(polys), 8)]:
        F = FA.poly_seq(P, "measure-gen", c, audit_horizon=8)
        pv = check_pointwise(F, xs, p.horizon)
        diverging = sum(d.status is Status.CERTIFIED_DIVERGES for _, d in pv.details)
        mv = check_in_measure(F, p.eps_values(), p.horizon)
        if diverging < len(xs) - FA.phi(c, P).zero_bound or mv.status is not Status.CERTIFIED_CONVERGES:
            bad.append(str(P))
    out.append(_check(
        "algebra-members-diverge-ae", "nonzero elements of the generated algebra converge in measure but not a.e.",
        not bad, "certified pointwise divergence off the zeros of phi and certified convergence in measure",
        failures=bad,
    ))
    return out


def _thm_2_3(p: ScenarioParams) -> list[Check]:
    out = []
    pairs = {(k, n): W.interleave_index(k, n) for k in range(1, 65) for n in range(1, 65)}
    injective = len(set(pairs.values())) == len(pairs)
    hit = sorted(i for i in pairs.values() if i <= 64)
    mono = all(pairs[k, n] < pairs[k, n + 1] for k in range(1, 65) for n in range(1, 64)) and all(
        pairs[k, n] < pairs[k + 1, n] for k in range(1, 64) for n in range(1, 65)
    )
    out.append(_check(
        "interleave-bijection", "i(k,n) = 2^(k-1)(2n-1) splits the positive integers into disjoint increasing runs",
        injective and hit == list(range(1, 65)) and mono,
        "injective on k,n <= 64, hits 1..64 exactly once, strictly increasing in k and in n",
    ))

    bad = []
    for n in range(1, 257):
        live = [k for k in range(1, 9) if not W.typewriter_split(k, n).is_zero()]
        owner = W.generation_owner(n)
        want = [owner] if owner is not None and owner <= 8 else []
        if live != want or any(W.typewriter_split(k, n) != W.typewriter(n) for k in live):
            bad.append(n)
    out.append(_check(
        "split-consistency", "each typewriter term survives in exactly one split sequence T(k)",
        not bad, "for n <= 256 and k <= 8 the split term is T_n for the owner of the generation and 0 otherwise",
        failures=bad[:5],
    ))

    r = FA.independence_rank(W.typewriter_split_seq, p.k_max)
    out.append(_check(
        "split-independence", "the split sequences T(k) are linearly independent",
        r.rank == p.k_max, f"rank {r.rank} via {r.method}",
        witnesses=[(k, n if n < 10**6 else f"2^{n.bit_length() - 1}", x if x.denominator < 10**6 else "dyadic midpoint") for k, n, x in r.witnesses],
    ))

    rng = random.Random(p.seed)
    xs = _grid(min(p.samples, 33))
    bad = []
    for trial in range(3):
        ks = list(range(1, 4))
        lam = [rng.choice([a for a in range(-5, 6) if a]) for _ in ks]
        F = FA.linear_combo(lam, [W.typewriter_split_seq(k) for k in ks])
        mv = check_in_measure(F, p.eps_values(), p.horizon)
        pv = check_pointwise(F, xs, p.horizon)
        for n in range(1, 257):
            owner = W.generation_owner(n)
            want = W.typewriter(n) * lam[owner - 1] if owner in ks else None
            got = F(n)
            if (want is None and not got.is_zero()) or (want is not None and got != want):
                bad.append((trial, n))
        if mv.status is not Status.CERTIFIED_CONVERGES or pv.status is not Status.CERTIFIED_DIVERGES:
            bad.append((trial, "modes"))
    out.append(_check(
        "split-combinations", "nonzero finite combinations of T(k) converge in measure but nowhere pointwise",
        not bad, "coordinates of a combination equal lambda_k T_n for the owner k; certified verdicts for both modes",
        failures=bad[:5],
    ))
    return out


# The brute-force oracle samples a grid of spacing 1/64; below this horizon the
# tail sets [N/2, N] can still cover grid points, so a disagreement is not evidence.
ORACLE_MIN_HORIZON = 256


def _thm_prop_3_1(p: ScenarioParams) -> list[Check]:
    out = []
    resolved = p.horizon >= ORACLE_MIN_HORIZON
    one = lambda n: MonomialSum.const(1)  # noqa: E731
    inv = lambda n: MonomialSum.const(Fraction(1, n))  # noqa: E731
    S = StructuredSetSeq(Domain.UNIT, lambda n: (W.shrink_set(n),), ShrinksToNull(lambda n: Fraction(1, n)))
    full = StructuredSetSeq(Domain.UNIT, lambda n: (interval(0, 1),), SweepsAll(misses_all=False))
    examples = [
        ("1 on [1/(n+1),1/n], pointwise", one, S, Mode.POINTWISE, Status.CERTIFIED_CONVERGES),
        ("1 on [1/(n+1),1/n], uniform", one, S, Mode.UNIFORM, Status.CERTIFIED_DIVERGES),
        ("1/n on [0,1], uniform", inv, full, Mode.UNIFORM, Status.CERTIFIED_CONVERGES),
    ]
    for label, a, E, mode, want in examples:
        claim = "alpha_n chi_{E_n} -> 0 verdicts for the reference instances"
        try:
            v = check_indicator_dichotomy(a, E, mode, p.horizon)
        except HypothesisViolated as exc:
            out.append(_check(f"example: {label}", claim, None, f"undecidable at horizon {p.horizon}: {exc}"))
            continue
        ok = v.status is want and dict(v.details)["agrees"]
        if not ok and resolved is False and v.status is want:
            ok = None
        out.append(_check(f"example: {label}", claim, ok, str(v)))

    rng = random.Random(p.seed)
    disagree, flag_mismatch, undecided = [], [], []
    tally = {m.value: {"converges": 0, "diverges": 0} for m in Mode}
    for i in range(p.polys):
        inst = random_dichotomy_instance(rng)
        for mode in Mode:
            try:
                v = check_indicator_dichotomy(inst.alpha, inst.sets, mode, p.horizon)
            except HypothesisViolated as exc:
                undecided.append((i, inst.alpha_label, str(exc)))
                break
            d = dict(v.details)
            conv = v.status is Status.CERTIFIED_CONVERGES
            tally[mode.value]["converges" if conv else "diverges"] += 1
            if not d["agrees"]:
                disagree.append((i, inst.alpha_label, inst.sets_label, mode.value))
            if mode is Mode.UNIFORM and conv != inst.alpha_to_zero:
                flag_mismatch.append((i, inst.alpha_label))
    ok = False if disagree else (None if undecided else True)
    note = ""
    if disagree and not resolved:
        ok, note = None, f"; horizon below {ORACLE_MIN_HORIZON}, the oracle grid is not resolved"
    out.append(_check(
        "dichotomy-oracle", "closed-form verdict of the dichotomy equals direct evaluation on the horizon",
        ok, f"{p.polys} seeded instances x 3 modes, horizon {p.horizon}; {len(undecided)} undecidable at this horizon{note}",
        disagreements=disagree[:5], undecided=undecided[:5], tally=tally,
    ))
    out.append(_check(
        "dichotomy-uniform", "alpha_n chi_{E_n} -> 0 uniformly exactly when alpha_n -> 0",
        not flag_mismatch, f"uniform verdict equals the declared alpha flag on all {p.polys} instances",
        mismatches=flag_mismatch[:5],
    ))
    return out


def _nup_conditions(F, eps_list, horizon) -> tuple[bool, str]:
    a = check_pointwise(F, _grid(17), horizon)
    bs = [check_almost_uniform(F, e, horizon) for e in eps_list]
    c = check_uniform(F, horizon)
    ok = (
        a.status is Status.CERTIFIED_CONVERGES
        and all(b.status is Status.CERTIFIED_CONVERGES for b in bs)
        and c.status is Status.CERTIFIED_DIVERGES
    )
    text = f"(A) {a.status.value}; (B) " + "; ".join(b.certificate for b in bs) + f"; (C) {c.status.value}"
    return ok, text


def _thm_3_4(p: ScenarioParams) -> list[Check]:
    out = []
    rng = random.Random(p.seed)
    ns = (1, 2, 5, 10, 100)
    mismatch, overlap_bad, wide, zeros = [], [], Fraction(0), 0
    polys = []
    for i in range(p.polys):
        P = FA.random_poly(rng)
        c = FA.random_symbols(rng, P.N)
        polys.append((P, c))
        ph = FA.phi(c, P)
        zeros += ph.certify_nonzero().status is not ZeroStatus.CERTIFIED_NONZERO
        s = ph.sup_abs(p.precision)
        for n in ns:
            col = FA.apply_polynomial(P, "nup-gen", c, n)
            f = col.to_pwfun()
            if n <= 10 and f != FA.expand_polynomial(P, "nup-gen", c, n):
                mismatch.append((i, n))
            e = ess_sup(f, [interval(Fraction(1, n + 1), Fraction(1, n))], p.precision)
            if not e.overlaps(s):
                overlap_bad.append((i, n))
            wide = max(wide, e.width + s.width)
    tol = Fraction(1, 10**12)
    out.append(_check("nup-collapse", "P(F(c,n)) collapses to phi(n((n+1)x-1)) S_n(x)", not mismatch,
                      "collapsed form equals brute-force expansion for n in (1, 2, 5, 10)", mismatches=mismatch[:5]))
    out.append(_check(
        "nup-sup-invariance", "the sup of |P(F(c,n))| does not depend on n",
        not overlap_bad and wide < tol,
        f"ess sup over [1/(n+1),1/n] overlaps sup over w in [0,1] of |phi(w)| for n in {ns}; max combined width {float(wide):.3e}",
        max_width=f"{float(wide):.3e}", failures=overlap_bad[:5],
    ))
    out.append(_check("nup-free", "phi_{c,J} is never the zero function", zeros == 0,
                      f"{p.polys - zeros}/{p.polys} certified nonzero"))

    bad = []
    seqs = [W.nup_gen_seq(1)] + [FA.poly_seq(P, "nup-gen", c, audit_horizon=8) for P, c in polys[:4]]
    for F in seqs:
        ok, text = _nup_conditions(F, p.eps_values(), p.horizon)
        if not ok:
            bad.append(f"{F.name}: {text}")
    out.append(_check(
        "nup-conditions", "generated sequences converge a.e. and almost uniformly but not uniformly a.e.",
        not bad, f"{len(seqs)} sequences: certified (A) pointwise a.e., (B) almost uniform, (C) no uniform a.e.",
        failures=bad,
    ))
    return out


def _thm_3_6(p: ScenarioParams) -> list[Check]:
    out = []
    ivs = [(k, n, W.shrink_set(W.interleave_index(k, n))) for k in range(1, 9) for n in range(1, 33)]
    ivs.sort(key=lambda t: t[2].lo_q)
    overlaps = [(a[:2], b[:2]) for a, b in zip(ivs, ivs[1:]) if _pt_cmp(a[2].hi, b[2].lo) > 0]
    out.append(_check("split-shrink-disjoint", "the sets of distinct split sequences S(k,n) have disjoint interiors",
                      not overlaps, f"{len(ivs)} supports for k <= 8, n <= 32", overlaps=overlaps[:5]))

    r = FA.independence_rank(W.shrink_split_seq, p.k_max)
    out.append(_check("split-shrink-independence", "the split sequences S(k) are linearly independent",
                      r.rank == p.k_max, f"rank {r.rank} via {r.method}",
                      witnesses=[(k, n, x) for k, n, x in r.witnesses]))

    rng = random.Random(p.seed)
    bad_sup, bad_nup = [], []
    for trial in range(3):
        ks = sorted(rng.sample(range(1, 9), 3))
        lam = [rng.choice([a for a in range(-5, 6) if a]) for _ in ks]
        F = FA.linear_combo(lam, [W.shrink_split_seq(k) for k in ks])
        for n in range(1, p.horizon + 1):
            if ess_sup(F(n), precision=64).lo < abs(lam[0]):
                bad_sup.append((trial, n))
        ok, text = _nup_conditions(F, p.eps_values(), min(p.horizon, 256))
        if not ok:
            bad_nup.append(text)
    out.append(_check(
        "split-shrink-sup", "ess sup of a combination is at least |alpha_1| wherever S(k_1,.) is live",
        not bad_sup, f"3 random combinations, every n <= {p.horizon}", failures=bad_sup[:5],
    ))
    out.append(_check(
        "split-shrink-nup", "nonzero combinations of S(k) converge a.e. and almost uniformly but not uniformly a.e.",
        not bad_nup, "certified (A), (B) for each eps, (C)", failures=bad_nup,
    ))
    return out


def _thm_3_9(p: ScenarioParams) -> list[Check]:
    out = []
    N, cut = p.horizon, p.k_max
    bad = []
    for fam in W.catalog():
        F = W.build(fam)
        D = d_metric(F, truncate(F, cut), N, p.precision)
        if not D.hi < Fraction(1, 2**cut):
            bad.append((str(fam), str(D)))
    out.append(_check(
        "truncation-density", "eventually null sequences are dense for the product metric",
        not bad, f"D(F, truncate(F, {cut})) < 2^-{cut} certified for all {len(W.catalog())} catalog families (N = {N})",
        failures=bad,
    ))
    T = W.typewriter_seq()
    tail_bad = []
    for n in range(1, N + 1):
        self_d = d_metric(T, T, n, p.precision)
        zero_d = d_metric(T, zero_seq(), n, p.precision)
        if (self_d.lo, self_d.hi) != (0, Fraction(1, 2**n)) or zero_d.width != Fraction(1, 2**n):
            tail_bad.append(n)
    ex = d_metric(T, zero_seq(), 2, p.precision)
    out.append(_check(
        "d-metric-tail", "the tail of the product metric beyond N contributes at most 2^-N",
        not tail_bad and ex.lo == Fraction(13, 60) and ex.hi == Fraction(13, 60) + Fraction(1, 4),
        f"exact tail width 2^-N for N <= {N}; D(T, 0) with N = 2 is [{ex.lo}, {ex.hi}]",
        failures=tail_bad,
    ))
    nulls = all(truncate(T, cut)(n).is_zero() for n in range(cut + 1, cut + 20))
    out.append(_check("truncation-null", "truncated sequences vanish after the cut", nulls,
                      f"truncate(T, {cut}) is 0 for n in {cut + 1}..{cut + 19}"))
    return out


def _thm_4_1(p: ScenarioParams) -> list[Check]:
    out = []
    c = 1
    prev = None
    increasing = True
    first_100 = None
    for n in range(2, p.horizon + 1):
        e = log_enclosure(MonomialSum.exp(LinearForm.const(n)) * MonomialSum.power(n, LinearForm.symbol(c, -1)), p.precision)
        if prev is not None and not prev.hi < e.lo:
            increasing = False
        if first_100 is None and e.lo > 100:
            first_100 = n
        prev = e
    out.append(_check(
        "l1-norm-blowup", "||F(c,n)||_1 = e^n n^-c tends to +inf",
        increasing and first_100 is not None and first_100 <= 110,
        f"log-norm enclosures strictly increase for 2 <= n <= {p.horizon}; first exceed 100 at n = {first_100}",
        first_exceeding_100=first_100,
    ))
    prev = None
    decreasing = True
    first_small = None
    for n in range(1, 1001):
        e = eval_enclosure(MonomialSum.power(n, LinearForm.symbol(c, -1)) if n > 1 else MonomialSum.const(1), p.precision)
        if prev is not None and not e.hi < prev.lo:
            decreasing = False
        if first_small is None and e.hi < Fraction(1, 1000):
            first_small = n
        prev = e
    out.append(_check(
        "uniform-decay", "sup |F(c,n)| = n^-c tends to 0", decreasing and first_small is not None and first_small <= 133,
        f"sup enclosures strictly decrease for n <= 1000; first below 1e-3 at n = {first_small}",
        first_below_1e_3=first_small,
    ))
    F = W.l1_gen_seq(c)
    lv, uv = check_l1(F), check_uniform(F)
    out.append(_check("l1-gen-modes", "F(c,.) converges uniformly to 0 but not in L1",
                      lv.status is Status.CERTIFIED_DIVERGES and uv.status is Status.CERTIFIED_CONVERGES,
                      f"L1: {lv}; uniform: {uv}"))

    rng = random.Random(p.seed)
    bad = []
    for i in range(p.polys):
        P = FA.random_poly(rng)
        cs = FA.random_symbols(rng, P.N)
        for n in (1, 2, 3, 10):
            col = FA.apply_polynomial(P, "l1-gen", cs, n)
            if col.to_pwfun() != FA.expand_polynomial(P, "l1-gen", cs, n):
                bad.append((i, n, "collapse"))
            if n >= 2 and col.certify_nonzero().status is not ZeroStatus.CERTIFIED_NONZERO:
                bad.append((i, n, "zero"))
    out.append(_check(
        "l1-algebra", "sum alpha_j n^-(c.j) never vanishes for n >= 2, so algebra elements keep the L1 blow-up",
        not bad, f"{p.polys} random polynomials, n in (1, 2, 3, 10)", failures=bad[:5],
    ))
    bad = [n for n in range(1, 101) if l1_norm(W.flat_bump(n), 64).lo != 1 or l1_norm(W.flat_bump(n), 64).hi != 1
           or ess_sup(W.flat_bump(n), precision=64).lo != Fraction(1, n)]
    R = W.flat_bump_seq()
    out.append(_check("flat-bump", "R_n = (1/n) chi_[0,n] converges uniformly to 0 with ||R_n||_1 = 1",
                      not bad and check_l1(R).status is Status.CERTIFIED_DIVERGES
                      and check_uniform(R).status is Status.CERTIFIED_CONVERGES,
                      "exact norms for n <= 100 and certified mode verdicts", failures=bad[:5]))
    return out


def _thm_4_3(p: ScenarioParams) -> list[Check]:
    out = []
    bad = []
    for k in range(1, p.horizon + 1):
        for n in range(1, p.horizon + 1):
            f = W.traveling_bump(k, n)
            l1, sup = l1_norm(f, 64), ess_sup(f, precision=64)
            if not (l1.is_exact() and l1.lo == 1 and sup.is_exact() and sup.lo == Fraction(1, n)):
                bad.append((k, n))
    out.append(_check("bump-norms", "||G(k,n)||_1 = 1 and sup G(k,n) = 1/n", not bad,
                      f"exact rationals for k, n <= {p.horizon}", failures=bad[:5]))

    blocks = sorted((W.block_interval(N, M) for N in range(1, 51) for M in range(1, N + 1)), key=lambda iv: iv.lo_q)
    total = sum(N * (N + 1) // 2 for N in range(1, 51))
    tiles = blocks[0].lo_q == 0 and blocks[-1].hi_q == total and all(
        a.hi_q == b.lo_q for a, b in zip(blocks, blocks[1:])
    ) and all(iv.hi_q - iv.lo_q > 0 for iv in blocks)
    out.append(_check("block-tiling", "the blocks I_{N,M} tile [0, +inf) without gaps or overlaps", tiles,
                      f"{len(blocks)} blocks for N <= 50 tile [0, {total}] exactly"))

    r = FA.independence_rank(W.traveling_bump_seq, p.k_max)
    out.append(_check("bump-independence", "the sequences G(k) are linearly independent",
                      r.rank == p.k_max, f"rank {r.rank} via {r.method}",
                      witnesses=[(k, n, x) for k, n, x in r.witnesses]))

    rng = random.Random(p.seed)
    bad = []
    for trial in range(3):
        ks = sorted(rng.sample(range(1, 9), 3))
        lam = [rng.choice([a for a in range(-5, 6) if a]) for _ in ks]
        G = FA.linear_combo(lam, [W.traveling_bump_seq(k) for k in ks])
        if check_l1(G).status is not Status.CERTIFIED_DIVERGES or check_uniform(G).status is not Status.CERTIFIED_CONVERGES:
            bad.append(trial)
        for n in range(1, 33):
            l1 = l1_norm(G(n), 64)
            if l1.lo != sum(abs(x) for x in lam):
                bad.append((trial, n))
    out.append(_check(
        "bump-combinations", "nonzero combinations of G(k) converge uniformly to 0 but not in L1",
        not bad, "certified verdicts; ||sum lambda_k G(k,n)||_1 = sum |lambda_k| exactly for n <= 32", failures=bad[:5],
    ))
    return out


@dataclass(frozen=True)
class Scenario:
    id: str
    title: str
    run: Callable[[ScenarioParams], list[Check]]
    defaults: dict


_SCENARIOS = {
    s.id: s
    for s in [
        Scenario("thm-2.2", "measure convergence without a.e. convergence is algebrable", _thm_2_2,
                 dict(horizon=4096, samples=257, polys=200, k_max=4)),
        Scenario("thm-2.3", "measure convergence without a.e. convergence is spaceable", _thm_2_3,
                 dict(horizon=4096, samples=257, polys=3, k_max=20)),
        Scenario("prop-3.1", "alpha_n chi_{E_n} convergence dichotomy", _thm_prop_3_1,
                 dict(horizon=4096, samples=257, polys=500, k_max=1)),
        Scenario("thm-3.4", "NUP sequences form a free algebra", _thm_3_4,
                 dict(horizon=4096, samples=17, polys=50, k_max=4, eps=("1/10", "1/100"))),
        Scenario("thm-3.6", "NUP sequences are spaceable", _thm_3_6,
                 dict(horizon=64, samples=17, polys=3, k_max=20, eps=("1/10", "1/100"))),
        Scenario("thm-3.9", "eventually null sequences are dense", _thm_3_9,
                 dict(horizon=20, samples=17, polys=1, k_max=10)),
        Scenario("thm-4.1", "uniform convergence without L1 convergence is algebrable", _thm_4_1,
                 dict(horizon=10000, samples=17, polys=20, k_max=1)),
        Scenario("thm-4.3", "uniform convergence without L1 convergence is spaceable", _thm_4_3,
                 dict(horizon=100, samples=17, polys=1, k_max=20)),
    ]
}

SCENARIO_IDS = tuple(_SCENARIOS)


def scenario(sid: str) -> Scenario:
    try:
        return _SCENARIOS[sid]
    except KeyError:
        raise UnknownScenario(sid) from None


def default_params(sid: str, seed: int = 0, precision: int | None = None) -> ScenarioParams:
    d = dict(eps=("1/8", "1/64"))
    d.update(scenario(sid).defaults)
    return ScenarioParams(
        scenario=sid,
        horizon=d["horizon"],
        eps=tuple(d["eps"]),
        samples=d["samples"],
        seed=seed,
        precision=precision or default_precision(),
        k_max=d["k_max"],
        polys=d["polys"],
    )


def run_scenario(sid: str, params: ScenarioParams | None = None) -> ScenarioReport:
    """Run every check of scenario ``sid``; failures are recorded, not raised."""
    sc = scenario(sid)
    params = params or default_params(sid)
    if params.scenario != sid:
        params = params.with_overrides(scenario=sid)
    start = time.perf_counter()
    checks = sc.run(params)
    ms = int((time.perf_counter() - start) * 1000)
    return ScenarioReport(sid, params, checks, params.seed, params.precision, ms)
