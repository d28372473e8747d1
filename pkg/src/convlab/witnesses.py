"""Constructors for the named witness families, each also packaged as a FunSeq."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .exactreal import DEFAULT_BASIS, LinearForm, MonomialSum, UnknownSymbol
from .pwfun import Domain, ExpPiece, Interval, PwExpFun, exp_piece, indicator, interval, make, zero
from .seqmodes import (
    ClosedForm,
    EventuallyAvoids,
    FunSeq,
    Limit,
    ShrinksToNull,
    StructuredSetSeq,
    SweepsAll,
    audit,
)


class IndexOutOfRange(ValueError):
    pass


class UnknownFamily(KeyError):
    pass


def _positive(**kw) -> None:
    for name, v in kw.items():
        if not isinstance(v, int) or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")


# ---------------------------------------------------------------------------
# index arithmetic


def dyadic(n: int) -> tuple[int, int]:
    """``(k, j)`` with ``n = 2**k + j`` and ``0 <= j < 2**k``."""
    _positive(n=n)
    k = n.bit_length() - 1
    return k, n - (1 << k)


def interleave_index(k: int, n: int) -> int:
    """``2**(k-1) * (2n - 1)``: a bijection from pairs onto the positive integers."""
    _positive(k=k, n=n)
    return (1 << (k - 1)) * (2 * n - 1)


def owner(i: int) -> tuple[int, int]:
    """Inverse of :func:`interleave_index`."""
    _positive(i=i)
    v = (i & -i).bit_length() - 1
    return v + 1, (i >> v) // 2 + 1


def generation_owner(n: int) -> int | None:
    """The ``k`` whose split typewriter keeps ``T_n``, or None (generation 0)."""
    g, _ = dyadic(n)
    return owner(g)[0] if g >= 1 else None


# ---------------------------------------------------------------------------
# dyadic windows


def typewriter_window(n: int) -> Interval:
    k, j = dyadic(n)
    return interval(Fraction(j, 1 << k), Fraction(j + 1, 1 << k))


_ONE = ((MonomialSum.const(1), LinearForm()),)


def typewriter(n: int) -> PwExpFun:
    return make(Domain.UNIT, [ExpPiece(typewriter_window(n), _ONE)])


def typewriter_split(k: int, n: int) -> PwExpFun:
    """``T_n`` when the generation of ``n`` is ``i(k, m)`` for some ``m``, else 0."""
    _positive(k=k, n=n)
    return typewriter(n) if generation_owner(n) == k else zero()


def shrink_set(n: int) -> Interval:
    """``[1/(n+1), 1/n]``."""
    _positive(n=n)
    return interval(Fraction(1, n + 1), Fraction(1, n))


def shrink_interval(n: int) -> PwExpFun:
    s = shrink_set(n)
    return indicator(s.lo, s.hi)


def shrink_split(k: int, n: int) -> PwExpFun:
    return shrink_interval(interleave_index(k, n))


def _symbol(c) -> int:
    if isinstance(c, str):
        return DEFAULT_BASIS.index(c)
    if not isinstance(c, int) or not 0 <= c < len(DEFAULT_BASIS):
        raise UnknownSymbol(c)
    return c


def measure_gen(c, n: int) -> PwExpFun:
    """``e^{-c x}`` on the ``n``-th dyadic window."""
    c = _symbol(c)
    w = typewriter_window(n)
    return exp_piece(w.lo, w.hi, 1, LinearForm.symbol(c, -1))


def nup_gen(c, n: int) -> PwExpFun:
    """``e^{-c n((n+1)x - 1)}`` on ``[1/(n+1), 1/n]``, with ``e^{cn}`` kept in the coefficient."""
    c = _symbol(c)
    s = shrink_set(n)
    return exp_piece(s.lo, s.hi, MonomialSum.exp(LinearForm.symbol(c, n)), LinearForm.symbol(c, -n * (n + 1)))


def l1_gen(c, n: int) -> PwExpFun:
    """``n^{-c}`` on ``[0, e^n]`` (half line)."""
    c = _symbol(c)
    _positive(n=n)
    return indicator(0, MonomialSum.exp(LinearForm.const(n)), _n_pow(n, c), Domain.HALF_LINE)


def _n_pow(n: int, c: int) -> MonomialSum:
    return MonomialSum.power(n, LinearForm.symbol(c, -1)) if n > 1 else MonomialSum.const(1)


def flat_bump(n: int) -> PwExpFun:
    """``(1/n)`` on ``[0, n]`` (half line)."""
    _positive(n=n)
    return indicator(0, n, Fraction(1, n), Domain.HALF_LINE)


def block_start(N: int) -> int:
    """Left end of the run of blocks ``I_{N,1}, ..., I_{N,N}``."""
    return (N - 1) * N * (N + 1) // 6


def block_interval(N: int, M: int) -> Interval:
    """``I_{N,M}``: the ``M``-th block of length ``M`` in run ``N``."""
    _positive(N=N, M=M)
    if M > N:
        raise IndexOutOfRange(f"block I_{{{N},{M}}} needs M <= N")
    base = block_start(N)
    return interval(base + M * (M - 1) // 2, base + M * (M + 1) // 2)


def traveling_bump(k: int, n: int) -> PwExpFun:
    """``(1/n)`` on ``I_{k+n-1, n}`` (half line)."""
    _positive(k=k, n=n)
    b = block_interval(k + n - 1, n)
    return indicator(b.lo, b.hi, Fraction(1, n), Domain.HALF_LINE)


# ---------------------------------------------------------------------------
# sequences with metadata


def _const(q) -> MonomialSum:
    return MonomialSum.const(Fraction(q))


def _gen_measure(n: int) -> MonomialSum:
    return _const(Fraction(1, 1 << dyadic(n)[0]))


def _split_live(k: int):
    for m in itertools.count(1):
        g = interleave_index(k, m)
        for j in range(1 << g):
            yield (1 << g) + j


def _maybe_audit(F: FunSeq, audit_horizon: int) -> FunSeq:
    if audit_horizon:
        audit(F, audit_horizon)
    return F


def typewriter_seq(audit_horizon: int = 32) -> FunSeq:
    one = ClosedForm(lambda n: _const(1), Limit.NOT_ZERO, "1")
    return _maybe_audit(
        FunSeq(
            name="typewriter",
            domain=Domain.UNIT,
            generator=typewriter,
            support_measure=ClosedForm(_gen_measure, Limit.ZERO, "2^-floor(log2 n)"),
            sup_norm=one,
            l1=ClosedForm(_gen_measure, Limit.ZERO, "2^-floor(log2 n)"),
            support=StructuredSetSeq(Domain.UNIT, lambda n: (typewriter_window(n),), SweepsAll(misses_all=True)),
            floor=_const(1),
            live=lambda: itertools.count(1),
        ),
        audit_horizon,
    )


def typewriter_split_seq(k: int, audit_horizon: int = 32) -> FunSeq:
    _positive(k=k)

    def live(n: int) -> bool:
        return generation_owner(n) == k

    measure = ClosedForm(
        lambda n: _gen_measure(n) if live(n) else MonomialSum(),
        Limit.ZERO,
        "2^-floor(log2 n) on live generations, 0 elsewhere",
    )
    return _maybe_audit(
        FunSeq(
            name=f"typewriter-split:k={k}",
            domain=Domain.UNIT,
            generator=lambda n: typewriter_split(k, n),
            support_measure=measure,
            sup_norm=ClosedForm(
                lambda n: _const(1 if live(n) else 0), Limit.NOT_ZERO, "1 on every live generation i(k, m)"
            ),
            l1=measure,
            support=StructuredSetSeq(
                Domain.UNIT,
                lambda n: (typewriter_window(n),) if live(n) else (),
                SweepsAll(misses_all=True),
            ),
            floor=_const(1),
            disjoint_group="typewriter-split",
            live=lambda: _split_live(k),
        ),
        audit_horizon,
    )


def _shrink_meta(index, name: str, group: str | None, audit_horizon: int) -> FunSeq:
    length = ClosedForm(
        lambda n: _const(Fraction(1, index(n) * (index(n) + 1))), Limit.ZERO, "1/(m(m+1)) for E_m = [1/(m+1), 1/m]"
    )
    return _maybe_audit(
        FunSeq(
            name=name,
            domain=Domain.UNIT,
            generator=lambda n: shrink_interval(index(n)),
            support_measure=length,
            sup_norm=ClosedForm(lambda n: _const(1), Limit.NOT_ZERO, "1"),
            l1=length,
            support=StructuredSetSeq(
                Domain.UNIT, lambda n: (shrink_set(index(n)),), ShrinksToNull(lambda n: Fraction(1, index(n)))
            ),
            floor=_const(1),
            disjoint_group=group,
            live=lambda: itertools.count(1),
        ),
        audit_horizon,
    )


def shrink_seq(audit_horizon: int = 32) -> FunSeq:
    return _shrink_meta(lambda n: n, "shrink", None, audit_horizon)


def shrink_split_seq(k: int, audit_horizon: int = 32) -> FunSeq:
    _positive(k=k)
    return _shrink_meta(lambda n: interleave_index(k, n), f"shrink-split:k={k}", "shrink-split", audit_horizon)


def measure_gen_seq(c, audit_horizon: int = 32) -> FunSeq:
    c = _symbol(c)

    def sup(n: int) -> MonomialSum:
        g, j = dyadic(n)
        return MonomialSum.exp(LinearForm.symbol(c, Fraction(-j, 1 << g)))

    return _maybe_audit(
        FunSeq(
            name=f"measure-gen:c={c}",
            domain=Domain.UNIT,
            generator=lambda n: measure_gen(c, n),
            support_measure=ClosedForm(_gen_measure, Limit.ZERO, "2^-floor(log2 n)"),
            sup_norm=ClosedForm(sup, Limit.NOT_ZERO, "e^{-c j 2^-k} >= e^{-c}"),
            support=StructuredSetSeq(Domain.UNIT, lambda n: (typewriter_window(n),), SweepsAll(misses_all=True)),
            floor=MonomialSum.exp(LinearForm.symbol(c, -1)),
            live=lambda: itertools.count(1),
        ),
        audit_horizon,
    )


def nup_gen_seq(c, audit_horizon: int = 32) -> FunSeq:
    c = _symbol(c)
    return _maybe_audit(
        FunSeq(
            name=f"nup-gen:c={c}",
            domain=Domain.UNIT,
            generator=lambda n: nup_gen(c, n),
            support_measure=ClosedForm(lambda n: _const(Fraction(1, n * (n + 1))), Limit.ZERO, "1/(n(n+1))"),
            sup_norm=ClosedForm(lambda n: _const(1), Limit.NOT_ZERO, "sup over w in [0,1] of e^{-cw} = 1, for every n"),
            support=StructuredSetSeq(Domain.UNIT, lambda n: (shrink_set(n),), ShrinksToNull(lambda n: Fraction(1, n))),
            floor=MonomialSum.exp(LinearForm.symbol(c, -1)),
            live=lambda: itertools.count(1),
        ),
        audit_horizon,
    )


def _half_line_support(n_hi):
    return StructuredSetSeq(Domain.HALF_LINE, lambda n: (interval(0, n_hi(n)),), SweepsAll(misses_all=False))


def l1_gen_seq(c, audit_horizon: int = 32) -> FunSeq:
    c = _symbol(c)
    e_n = lambda n: MonomialSum.exp(LinearForm.const(n))  # noqa: E731
    return _maybe_audit(
        FunSeq(
            name=f"l1-gen:c={c}",
            domain=Domain.HALF_LINE,
            generator=lambda n: l1_gen(c, n),
            support_measure=ClosedForm(e_n, Limit.INFINITY, "e^n"),
            sup_norm=ClosedForm(lambda n: _n_pow(n, c), Limit.ZERO, "n^-c"),
            l1=ClosedForm(lambda n: e_n(n) * _n_pow(n, c), Limit.INFINITY, "e^n n^-c"),
            support=_half_line_support(e_n),
            live=lambda: itertools.count(1),
        ),
        audit_horizon,
    )


def flat_bump_seq(audit_horizon: int = 32) -> FunSeq:
    return _maybe_audit(
        FunSeq(
            name="flat-bump",
            domain=Domain.HALF_LINE,
            generator=flat_bump,
            support_measure=ClosedForm(lambda n: _const(n), Limit.INFINITY, "n"),
            sup_norm=ClosedForm(lambda n: _const(Fraction(1, n)), Limit.ZERO, "1/n"),
            l1=ClosedForm(lambda n: _const(1), Limit.NOT_ZERO, "1 for every n"),
            support=_half_line_support(lambda n: n),
            live=lambda: itertools.count(1),
        ),
        audit_horizon,
    )


def traveling_bump_seq(k: int, audit_horizon: int = 32) -> FunSeq:
    _positive(k=k)
    return _maybe_audit(
        FunSeq(
            name=f"traveling-bump:k={k}",
            domain=Domain.HALF_LINE,
            generator=lambda n: traveling_bump(k, n),
            support_measure=ClosedForm(lambda n: _const(n), Limit.INFINITY, "n"),
            sup_norm=ClosedForm(lambda n: _const(Fraction(1, n)), Limit.ZERO, "1/n"),
            l1=ClosedForm(lambda n: _const(1), Limit.NOT_ZERO, "1 for every n"),
            support=StructuredSetSeq(
                Domain.HALF_LINE, lambda n: (block_interval(k + n - 1, n),), EventuallyAvoids()
            ),
            disjoint_group="traveling-bump",
            live=lambda: itertools.count(1),
        ),
        audit_horizon,
    )


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: tuple[tuple[str, int], ...] = field(default=())

    def get(self, key: str, default=None):
        return dict(self.params).get(key, default)

    def __str__(self) -> str:
        if not self.params:
            return self.family
        return self.family + ":" + ",".join(f"{k}={v}" for k, v in self.params)


_FAMILIES = {
    "typewriter": ((), lambda p, a: typewriter_seq(a)),
    "typewriter-split": (("k",), lambda p, a: typewriter_split_seq(p["k"], a)),
    "shrink": ((), lambda p, a: shrink_seq(a)),
    "shrink-split": (("k",), lambda p, a: shrink_split_seq(p["k"], a)),
    "measure-gen": (("c",), lambda p, a: measure_gen_seq(p["c"], a)),
    "nup-gen": (("c",), lambda p, a: nup_gen_seq(p["c"], a)),
    "l1-gen": (("c",), lambda p, a: l1_gen_seq(p["c"], a)),
    "flat-bump": ((), lambda p, a: flat_bump_seq(a)),
    "traveling-bump": (("k",), lambda p, a: traveling_bump_seq(p["k"], a)),
}

FAMILY_IDS = tuple(_FAMILIES)


def parse_family(text: str) -> FamilySpec:
    """Parse ``name`` or ``name:key=value,...`` and validate the parameters."""
    name, _, rest = text.strip().partition(":")
    if name not in _FAMILIES:
        raise UnknownFamily(name)
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"bad parameter {item!r} in {text!r}")
            try:
                params[key.strip()] = int(val)
            except ValueError:
                raise ValueError(f"parameter {key} must be an integer in {text!r}") from None
    wanted = _FAMILIES[name][0]
    if set(params) != set(wanted):
        raise ValueError(f"{name} takes parameters {list(wanted)}, got {sorted(params)}")
    if "k" in params:
        _positive(k=params["k"])
    if "c" in params:
        _symbol(params["c"])
    return FamilySpec(name, tuple(sorted(params.items())))


@lru_cache(maxsize=None)
def _build(fam: FamilySpec, audit_horizon: int) -> FunSeq:
    return _FAMILIES[fam.family][1](dict(fam.params), audit_horizon)


def build(fam: FamilySpec | str, audit_horizon: int = 32) -> FunSeq:
    if isinstance(fam, str):
        fam = parse_family(fam)
    return _build(fam, audit_horizon)


def catalog(k: int = 2, c: int = 1) -> list[FamilySpec]:
    """One representative of every family."""
    out = []
    for name, (keys, _) in _FAMILIES.items():
        params = tuple((key, k if key == "k" else c) for key in keys)
        out.append(FamilySpec(name, params))
    return out
