"""Polynomials in generator families, their collapsed form, and independence.

A polynomial without constant term applied coordinate-wise to generators
``F(c_1, n), ..., F(c_N, n)`` collapses, because indicators are idempotent,
to one exponential sum times one indicator.  The collapsed pair is the
primary object; brute-force expansion through pwfun is the cross-check.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import sympy

from .exactreal import (
    Enclosure,
    LinearForm,
    MonomialSum,
    ZeroTest,
    certify_nonzero,
    eval_enclosure,
)
from .pwfun import (
    Domain,
    DomainMismatch,
    PwExpFun,
    combine,
    ess_sup,
    from_expr,
    indicator,
    interval,
    multiply,
    power,
    value_at,
)
from .seqmodes import (
    ClosedForm,
    FunSeq,
    Limit,
    ShrinksToNull,
    StructuredSetSeq,
    SweepsAll,
    audit,
    zero_seq,
)
from . import witnesses as W


class EmptyPolynomial(ValueError):
    pass


class UnsupportedFamily(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class MultiIndexPoly:
    """``sum alpha_j u^j`` over nonzero multi-indices ``j`` in ``N`` variables."""

    N: int
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]

    @classmethod
    def of(cls, N: int, terms: Mapping[tuple[int, ...], object] | Iterable[tuple[tuple[int, ...], object]]) -> "MultiIndexPoly":
        if N < 1:
            raise ValueError("need at least one variable")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, ...], Fraction] = {}
        for j, a in items:
            j = tuple(int(e) for e in j)
            if len(j) != N or any(e < 0 for e in j):
                raise ValueError(f"bad multi-index {j} for {N} variables")
            if not any(j):
                raise ValueError("polynomials have no constant term")
            acc[j] = acc.get(j, Fraction(0)) + Fraction(a)
        kept = tuple(sorted((j, a) for j, a in acc.items() if a))
        if not kept:
            raise EmptyPolynomial("polynomial has no nonzero terms")
        return cls(N, kept)

    @property
    def degree(self) -> int:
        return max(sum(j) for j, _ in self.terms)

    def __str__(self) -> str:
        parts = []
        for j, a in self.terms:
            mono = "*".join(f"u{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(j) if e)
            parts.append(f"{a}*{mono}")
        return " + ".join(parts)


def random_poly(rng: random.Random, max_vars: int = 3, max_degree: int = 4, max_terms: int = 6) -> MultiIndexPoly:
    """Coefficients uniform on ``{-5..5} minus 0`` over at most ``max_terms`` multi-indices."""
    N = rng.randint(1, max_vars)
    pool = [j for j in itertools.product(range(max_degree + 1), repeat=N) if 0 < sum(j) <= max_degree]
    chosen = rng.sample(pool, rng.randint(1, min(max_terms, len(pool))))
    return MultiIndexPoly.of(N, [(j, rng.choice([a for a in range(-5, 6) if a])) for j in chosen])


def random_symbols(rng: random.Random, N: int, pool: int = 12) -> tuple[int, ...]:
    """``N`` distinct irrational basis symbols."""
    return tuple(rng.sample(range(1, pool), N))


# ---------------------------------------------------------------------------
# exponential sums


@dataclass(frozen=True)
class ExponentSumFn:
    """``w -> sum coef_i e^{rate_i w}`` with pairwise distinct rates.

    ``zero_bound`` bounds the number of real zeros (terms - 1).
    """

    terms: tuple[tuple[MonomialSum, LinearForm], ...]
    zero_bound: int

    def value(self, w) -> MonomialSum:
        w = Fraction(w)
        total = MonomialSum()
        for c, r in self.terms:
            total = total + c * MonomialSum.exp(r * w)
        return total

    def certify_nonzero(self) -> ZeroTest:
        """Nonvanishing as a function, via its value at ``w = 1``."""
        return certify_nonzero(self.value(1))

    def on(self, lo, hi, domain: Domain = Domain.UNIT) -> PwExpFun:
        return from_expr(lo, hi, self.terms, domain)

    def sup_abs(self, precision: int = 256) -> Enclosure:
        """``sup`` of ``|phi|`` over ``w`` in ``[0, 1]``."""
        return ess_sup(self.on(0, 1), precision=precision)


def phi(c: Sequence[int], P: MultiIndexPoly) -> ExponentSumFn:
    """``sum alpha_j e^{-(c.j) w}``."""
    if len(c) != P.N:
        raise ValueError(f"need {P.N} symbols, got {len(c)}")
    if len(set(c)) != len(c):
        raise ValueError("symbols must be distinct")
    terms = []
    for j, a in P.terms:
        rate = LinearForm()
        for ci, e in zip(c, j):
            if e:
                rate = rate + LinearForm.symbol(ci, -e)
        terms.append((MonomialSum.const(a), rate))
    if len({r for _, r in terms}) != len(terms):
        raise AssertionError("rates must be distinct for distinct symbols")
    return ExponentSumFn(tuple(terms), len(terms) - 1)


# ---------------------------------------------------------------------------
# collapse


class Gen(enum.Enum):
    MEASURE = "measure-gen"
    NUP = "nup-gen"
    L1 = "l1-gen"


_GEN_FUN = {Gen.MEASURE: W.measure_gen, Gen.NUP: W.nup_gen, Gen.L1: W.l1_gen}


def _gen(g) -> Gen:
    try:
        return Gen(g.value if isinstance(g, Gen) else g)
    except ValueError:
        raise UnsupportedFamily(g) from None


@dataclass(frozen=True)
class Collapsed:
    """``P(F(c_1, n), ..., F(c_N, n))`` as one factor times one indicator.

    ``factor`` is an ExponentSumFn (in ``x`` for measure-gen, in
    ``w = n((n+1)x - 1)`` for nup-gen) or a scalar MonomialSum (l1-gen).
    """

    gen: Gen
    n: int
    factor: ExponentSumFn | MonomialSum
    indicator: PwExpFun

    def to_pwfun(self) -> PwExpFun:
        piece = self.indicator.pieces[0].interval
        dom = self.indicator.domain
        if self.gen is Gen.L1:
            return indicator(piece.lo, piece.hi, self.factor, dom)
        if self.gen is Gen.MEASURE:
            return from_expr(piece.lo, piece.hi, self.factor.terms, dom)
        n = self.n
        # e^{r w} with w = n(n+1)x - n  ->  coefficient e^{-r n}, rate r n(n+1)
        terms = [(c * MonomialSum.exp(r * -n), r * (n * (n + 1))) for c, r in self.factor.terms]
        return from_expr(piece.lo, piece.hi, terms, dom)

    def certify_nonzero(self) -> ZeroTest:
        if isinstance(self.factor, MonomialSum):
            return certify_nonzero(self.factor)
        return self.factor.certify_nonzero()


def apply_polynomial(P: MultiIndexPoly, gen, c: Sequence[int], n: int) -> Collapsed:
    """The collapsed form of ``P`` applied to the generators at index ``n``."""
    g = _gen(gen)
    if g is Gen.MEASURE:
        return Collapsed(g, n, phi(c, P), W.typewriter(n))
    if g is Gen.NUP:
        return Collapsed(g, n, phi(c, P), W.shrink_interval(n))
    if len(c) != P.N:
        raise ValueError(f"need {P.N} symbols, got {len(c)}")
    scalar = MonomialSum()
    for j, a in P.terms:
        form = LinearForm()
        for ci, e in zip(c, j):
            if e:
                form = form + LinearForm.symbol(ci, -e)
        scalar = scalar + (MonomialSum.power(n, form, a) if n > 1 else MonomialSum.const(a))
    return Collapsed(g, n, scalar, indicator(0, MonomialSum.exp(LinearForm.const(n)), 1, Domain.HALF_LINE))


def expand_polynomial(P: MultiIndexPoly, gen, c: Sequence[int], n: int) -> PwExpFun:
    """Brute force: products and powers of the generator functions, then a linear combination."""
    g = _gen(gen)
    fs = [_GEN_FUN[g](ci, n) for ci in c]
    monos = []
    for j, _ in P.terms:
        prod = None
        for f, e in zip(fs, j):
            if e:
                t = power(f, e)
                prod = t if prod is None else multiply(prod, t)
        monos.append(prod)
    return combine([a for _, a in P.terms], monos)


def poly_seq(P: MultiIndexPoly, gen, c: Sequence[int], audit_horizon: int = 32) -> FunSeq:
    """``n -> P(F(c_1, n), ..., F(c_N, n))`` with metadata from the collapsed form."""
    g = _gen(gen)
    c = tuple(c)
    name = f"{g.value}[{P}; c={c}]"
    gen_fn = lambda n: apply_polynomial(P, g, c, n).to_pwfun()  # noqa: E731
    if g is Gen.MEASURE:
        ph = phi(c, P)
        F = FunSeq(
            name=name,
            domain=Domain.UNIT,
            generator=gen_fn,
            support_measure=ClosedForm(W._gen_measure, Limit.ZERO, "2^-floor(log2 n) (phi has finitely many zeros)"),
            support=StructuredSetSeq(Domain.UNIT, lambda n: (W.typewriter_window(n),), SweepsAll(misses_all=True)),
            floor=ph.value,
            live=lambda: itertools.count(1),
        )
    elif g is Gen.NUP:
        ph = phi(c, P)
        sup = ph.sup_abs()
        F = FunSeq(
            name=name,
            domain=Domain.UNIT,
            generator=gen_fn,
            support_measure=ClosedForm(lambda n: MonomialSum.const(Fraction(1, n * (n + 1))), Limit.ZERO, "1/(n(n+1))"),
            sup_norm=ClosedForm(
                lambda n: sup,
                Limit.NOT_ZERO if sup.lo > 0 else Limit.ZERO,
                f"sup over w in [0,1] of |phi(w)| in {sup}, the same for every n",
            ),
            support=StructuredSetSeq(Domain.UNIT, lambda n: (W.shrink_set(n),), ShrinksToNull(lambda n: Fraction(1, n))),
            live=lambda: itertools.count(1),
        )
    else:
        def abs_scalar(n: int) -> Enclosure:
            e = eval_enclosure(apply_polynomial(P, g, c, n).factor, 128)
            lo, hi = sorted((abs(e.lo), abs(e.hi)))
            return Enclosure(Fraction(0) if e.lo <= 0 <= e.hi else lo, hi, 128)

        def l1(n: int) -> Enclosure:
            s = abs_scalar(n)
            en = eval_enclosure(MonomialSum.exp(LinearForm.const(n)), 128)
            return Enclosure(s.lo * en.lo, s.hi * en.hi, 128)

        e_n = lambda n: MonomialSum.exp(LinearForm.const(n))  # noqa: E731
        F = FunSeq(
            name=name,
            domain=Domain.HALF_LINE,
            generator=gen_fn,
            support_measure=ClosedForm(e_n, Limit.INFINITY, "e^n"),
            sup_norm=ClosedForm(abs_scalar, Limit.ZERO, "|sum alpha_j n^-(c.j)| -> 0"),
            l1=ClosedForm(l1, Limit.INFINITY, "e^n |sum alpha_j n^-(c.j)| -> +inf"),
            support=StructuredSetSeq(Domain.HALF_LINE, lambda n: (interval(0, e_n(n)),), SweepsAll(misses_all=False)),
            live=lambda: itertools.count(1),
        )
    if audit_horizon:
        audit(F, audit_horizon)
    return F


# ---------------------------------------------------------------------------
# linear combinations


def _combine_forms(lambdas, forms, how: str) -> ClosedForm | None:
    if any(f is None for f in forms):
        return None
    if how == "sum":
        formula = lambda n: _sum_abs([f.formula(n) for f in forms])  # noqa: E731
    else:
        formula = lambda n: _max_abs(lambdas, [f.enclosure(n) for f in forms])  # noqa: E731
    limits = {f.limit for f in forms}
    if limits == {Limit.ZERO}:
        limit = Limit.ZERO
    elif Limit.INFINITY in limits and how == "sum":
        limit = Limit.INFINITY
    else:
        limit = Limit.NOT_ZERO if Limit.NOT_ZERO in limits or Limit.INFINITY in limits else Limit.ZERO
    return ClosedForm(formula, limit, f"{how} over disjoint members of " + ", ".join(f.reason for f in forms))


def _sum_abs(values):
    if any(isinstance(v, Enclosure) for v in values):
        encs = [v if isinstance(v, Enclosure) else eval_enclosure(v, 128) for v in values]
        total = encs[0]
        for e in encs[1:]:
            total = total + e
        return total
    total = MonomialSum()
    for v in values:
        total = total + v
    return total


def _max_abs(lambdas, encs: list[Enclosure]) -> Enclosure:
    scaled = []
    for lam, e in zip(lambdas, encs):
        le = eval_enclosure(lam, 128)
        a = max(abs(le.lo), abs(le.hi))
        b = min(abs(le.lo), abs(le.hi)) if le.excludes_zero() else Fraction(0)
        scaled.append(Enclosure(b * e.lo, a * e.hi, e.prec))
    return Enclosure(max(s.lo for s in scaled), max(s.hi for s in scaled), scaled[0].prec)


def linear_combo(lambdas: Sequence, seqs: Sequence[FunSeq]) -> FunSeq:
    """Coordinate-wise ``sum lambda_i F_i``.

    When every member carries the same ``disjoint_group`` tag, supports are
    disjoint at each ``n`` and the metadata combines: support measures and
    L1 norms add, the sup norm is the max of ``|lambda_i|`` times the member sup.
    """
    if len(lambdas) != len(seqs):
        raise ValueError("one coefficient per sequence")
    if not seqs:
        raise ValueError("empty combination")
    dom = seqs[0].domain
    for s in seqs:
        if s.domain is not dom:
            raise DomainMismatch(f"{s.domain.value} vs {dom.value}")
    lam = [MonomialSum.coerce(Fraction(x) if isinstance(x, (int, str)) else x) for x in lambdas]
    pairs = [(l, s) for l, s in zip(lam, seqs) if not l.is_zero()]
    if not pairs:
        return zero_seq(dom)
    ls, ss = [p[0] for p in pairs], [p[1] for p in pairs]
    name = " + ".join(f"({l})*{s.name}" for l, s in pairs)
    gen = lambda n: combine(ls, [s(n) for s in ss], dom)  # noqa: E731
    groups = {s.disjoint_group for s in ss}
    if len(groups) != 1 or None in groups:
        return FunSeq(name=name, domain=dom, generator=gen)

    measure = _combine_forms(ls, [s.support_measure for s in ss], "sum")
    l1 = None
    if all(s.l1 is not None for s in ss):
        l1 = ClosedForm(
            lambda n: _weighted_l1(ls, ss, n),
            _combine_forms(ls, [s.l1 for s in ss], "sum").limit,
            "sum of |lambda_i| ||F_i(n)||_1 over disjoint members",
        )
    sup = _combine_forms(ls, [s.sup_norm for s in ss], "max")
    support = None
    descs = [s.support for s in ss]
    if all(d is not None for d in descs):
        kinds = {type(d.descriptor) for d in descs}
        sets = lambda n: tuple(iv for d in descs for iv in d(n))  # noqa: E731
        if kinds == {ShrinksToNull}:
            rights = [d.descriptor.right for d in descs]
            support = StructuredSetSeq(dom, sets, ShrinksToNull(lambda n: max(r(n) for r in rights)))
        elif kinds == {SweepsAll} and all(d.descriptor.misses_all for d in descs):
            support = StructuredSetSeq(dom, sets, SweepsAll(misses_all=True))
    floor = None
    if all(isinstance(s.floor, MonomialSum) for s in ss):
        cands = []
        for l, s in zip(ls, ss):
            e = eval_enclosure(l * s.floor, 128)
            cands.append((min(abs(e.lo), abs(e.hi)), l * s.floor))
        floor = min(cands, key=lambda t: t[0])[1]
    live = None
    if all(s.live is not None for s in ss):
        live = lambda: _merge_live([s.live() for s in ss])  # noqa: E731
    return FunSeq(
        name=name,
        domain=dom,
        generator=gen,
        support_measure=measure,
        sup_norm=sup,
        l1=l1,
        support=support,
        floor=floor,
        disjoint_group=ss[0].disjoint_group,
        live=live,
    )


def _weighted_l1(ls, ss, n: int):
    total = MonomialSum()
    encs = []
    for l, s in zip(ls, ss):
        v = s.l1.formula(n)
        if isinstance(v, Enclosure) or l.as_rational() is None:
            encs.append((l, v))
            continue
        total = total + v * abs(l.as_rational())
    if not encs:
        return total
    acc = eval_enclosure(total, 128)
    for l, v in encs:
        ve = v if isinstance(v, Enclosure) else eval_enclosure(v, 128)
        le = eval_enclosure(l, 128)
        a, b = sorted((abs(le.lo), abs(le.hi)))
        acc = acc + Enclosure(a * ve.lo, b * ve.hi, 128)
    return acc


def _merge_live(its):
    iters = [iter(i) for i in its]
    while iters:
        for it in list(iters):
            try:
                yield next(it)
            except StopIteration:
                iters.remove(it)


# ---------------------------------------------------------------------------
# independence


@dataclass(frozen=True)
class RankCertificate:
    rank: int
    method: str
    witnesses: tuple[tuple[int, int, Fraction], ...]  # (k, n_k, x_k)


def _separating(members: list[FunSeq], k: int, budget: int) -> tuple[int, Fraction] | None:
    F = members[k]
    for n in itertools.islice(F.live(), budget):
        f = F(n)
        if f.is_zero():
            continue
        for p in f.pieces:
            iv = p.interval
            if iv.lo_q is None or iv.hi_q is None:
                continue
            x = (iv.lo_q + iv.hi_q) / 2
            if value_at(f, x).is_zero():
                continue
            if all(value_at(G(n), x).is_zero() for i, G in enumerate(members) if i != k):
                return n, x
    return None


def _matrix_rank(members: list[FunSeq], budget: int) -> int:
    dom = members[0].domain
    top = 1 if dom is Domain.UNIT else 64
    xs = [Fraction(top * (2 * i + 1), 128) for i in range(64)]
    rows = []
    for n in range(1, min(budget, 64) + 1):
        fs = [F(n) for F in members]
        for x in xs:
            vals = [value_at(f, x) for f in fs]
            if any(v.as_rational() is None for v in vals):
                continue
            row = [sympy.Rational(v.as_rational().numerator, v.as_rational().denominator) for v in vals]
            if any(row):
                rows.append(row)
    if not rows:
        return 0
    return sympy.Matrix(rows).rank()


def independence_rank(family: Callable[[int], FunSeq], k_max: int, coord_budget: int = 4096) -> RankCertificate:
    """Rank of ``{family(k) : k <= k_max}``.

    First looks, for each ``k``, for a coordinate ``n_k`` and point ``x_k``
    where ``family(k)`` is the only nonzero member; the evaluation matrix on
    those witnesses is then diagonal.  Falls back to the exact rank of the
    evaluation matrix on a rational grid.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    members = [family(k) for k in range(1, k_max + 1)]
    found = []
    for i, F in enumerate(members):
        if F.live is None:
            break
        w = _separating(members, i, coord_budget)
        if w is None:
            break
        found.append((i + 1, w[0], w[1]))
    if len(found) == k_max:
        diag = [[value_at(members[b](n), x) for b in range(k_max)] for _, n, x in found]
        ok = all(diag[a][b].is_zero() == (a != b) for a in range(k_max) for b in range(k_max))
        if ok:
            return RankCertificate(k_max, "separating coordinates", tuple(found))
    rank = _matrix_rank(members, coord_budget)
    if rank < k_max:
        raise BudgetExhausted(f"rank {rank} < {k_max} within budget {coord_budget}")
    return RankCertificate(rank, "exact rank of the evaluation matrix", ())

