"""Function sequences, the product metric D and convergence-mode checkers.

Every checker returns a :class:`ConvergenceVerdict`.  Certified statuses are
only produced from audited closed-form metadata or from a limsup descriptor;
everything else is finite-horizon evidence and says so.
"""

from __future__ import annotations

import enum
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .exactreal import (
    Enclosure,
    MonomialSum,
    Ordering,
    compare,
    eval_enclosure,
)
from .pwfun import (
    Domain,
    DomainMismatch,
    Interval,
    OutOfDomain,
    PwExpFun,
    ess_sup,
    l1_norm,
    rho,
    superlevel_measure,
    support_measure,
    values_on_grid,
    zero,
)

DEFAULT_HORIZON = 2**12
DEFAULT_TOL = Fraction(1, 64)


def default_grid() -> list[Fraction]:
    return [Fraction(k, 256) for k in range(257)]


class HypothesisViolated(ValueError):
    pass


class AuditFailure(AssertionError):
    pass


# ---------------------------------------------------------------------------
# metadata


class Limit(enum.Enum):
    ZERO = "tends to 0"
    NOT_ZERO = "stays >= a positive constant infinitely often"
    INFINITY = "tends to +inf"


@dataclass(frozen=True)
class ClosedForm:
    """``formula(n)`` is the exact value (or a certified enclosure) at ``n``."""

    formula: Callable[[int], MonomialSum | Enclosure]
    limit: Limit
    reason: str

    def enclosure(self, n: int, precision: int = 64) -> Enclosure:
        v = self.formula(n)
        return v if isinstance(v, Enclosure) else eval_enclosure(v, precision)


@dataclass(frozen=True)
class ShrinksToNull:
    """``sup E_n -> 0``; ``right(n)`` bounds ``E_n`` from the right and is nonincreasing."""

    right: Callable[[int], Fraction]
    contains_zero: bool = False

    def first_below(self, delta: Fraction) -> int:
        """Least ``n`` with ``right(n) <= delta``."""
        hi = 1
        while self.right(hi) > delta:
            hi *= 2
        lo = hi // 2 + 1 if hi > 1 else 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.right(mid) <= delta:
                hi = mid
            else:
                lo = mid + 1
        return lo


@dataclass(frozen=True)
class SweepsAll:
    """Every point of the domain lies in infinitely many ``E_n``.

    ``misses_all``: every point also lies outside infinitely many ``E_n``.
    """

    misses_all: bool = True


@dataclass(frozen=True)
class EventuallyAvoids:
    """Points of ``region`` lie in finitely many ``E_n``; the rest in infinitely many.

    ``region=None`` means the whole domain, i.e. the limsup is empty.
    """

    region: tuple[Interval, ...] | None = None


@dataclass(frozen=True)
class CustomLimsup:
    """Explicit limsup, decided only for points inside ``covers`` (None: everywhere)."""

    limsup: tuple[Interval, ...] = ()
    points: tuple[Fraction, ...] = ()
    covers: tuple[Interval, ...] | None = None


Descriptor = ShrinksToNull | SweepsAll | EventuallyAvoids | CustomLimsup


@dataclass(frozen=True)
class StructuredSetSeq:
    domain: Domain
    generator: Callable[[int], tuple[Interval, ...]]
    descriptor: Descriptor

    def __call__(self, n: int) -> tuple[Interval, ...]:
        return self.generator(n)


class Membership(enum.Enum):
    IN_LIMSUP = "in limsup"
    NOT_IN_LIMSUP = "not in limsup"
    UNKNOWN = "unknown"


def _in_region(region: Iterable[Interval], x) -> bool:
    return any(iv.contains(x) for iv in region)


def _check_point(domain: Domain, x) -> None:
    x = Fraction(x)
    if x < 0 or (domain is Domain.UNIT and x > 1):
        raise OutOfDomain(f"x = {x} outside {domain.value}")


def limsup_membership(E: StructuredSetSeq, x) -> Membership:
    """Decide ``x in limsup E_n`` from the tail descriptor."""
    _check_point(E.domain, x)
    d = E.descriptor
    x = Fraction(x)
    if isinstance(d, SweepsAll):
        return Membership.IN_LIMSUP
    if isinstance(d, ShrinksToNull):
        return Membership.IN_LIMSUP if x == 0 and d.contains_zero else Membership.NOT_IN_LIMSUP
    if isinstance(d, EventuallyAvoids):
        if d.region is None or _in_region(d.region, x):
            return Membership.NOT_IN_LIMSUP
        return Membership.IN_LIMSUP
    if d.covers is not None and not _in_region(d.covers, x):
        return Membership.UNKNOWN
    if x in d.points or _in_region(d.limsup, x):
        return Membership.IN_LIMSUP
    return Membership.NOT_IN_LIMSUP


def _domain_measure(domain: Domain) -> Fraction | None:
    return Fraction(1) if domain is Domain.UNIT else None


def _gaps(region: Sequence[Interval], domain: Domain) -> tuple[list[tuple], bool]:
    """Parts of the domain not covered by ``region``: (lo, hi) gaps and whether a gap is unbounded."""
    from .pwfun import _pt_cmp

    ivs = sorted(region, key=lambda iv: (iv.lo_q if iv.lo_q is not None else eval_enclosure(iv.lo, 64).mid))
    gaps = []
    reach = MonomialSum()
    reach_closed = False
    for iv in ivs:
        c = _pt_cmp(iv.lo, reach)
        if c > 0 or (c == 0 and not (reach_closed or iv.lo_closed)):
            gaps.append((reach, iv.lo))
        if iv.hi is None:
            return gaps, False
        c = _pt_cmp(iv.hi, reach)
        if c > 0 or (c == 0 and iv.hi_closed):
            reach, reach_closed = iv.hi, iv.hi_closed
    if domain is Domain.HALF_LINE:
        return gaps, True
    one = MonomialSum.const(1)
    c = _pt_cmp(reach, one)
    if c < 0 or not reach_closed:
        gaps.append((reach, one))
    return gaps, False


def limsup_is_empty(E: StructuredSetSeq) -> bool | None:
    """Whether ``limsup E_n`` is empty; None if the descriptor cannot tell."""
    d = E.descriptor
    if isinstance(d, SweepsAll):
        return False
    if isinstance(d, ShrinksToNull):
        return not d.contains_zero
    if isinstance(d, EventuallyAvoids):
        if d.region is None:
            return True
        gaps, unbounded = _gaps(d.region, E.domain)
        return not gaps and not unbounded
    if d.covers is not None:
        return None
    return not d.limsup and not d.points


def limsup_is_null(E: StructuredSetSeq) -> bool | None:
    """Whether ``m(limsup E_n) = 0``; None if the descriptor cannot tell."""
    d = E.descriptor
    if isinstance(d, SweepsAll):
        return False
    if isinstance(d, ShrinksToNull):
        return True
    if isinstance(d, EventuallyAvoids):
        if d.region is None:
            return True
        gaps, unbounded = _gaps(d.region, E.domain)
        return not unbounded and all(compare(a, b) is Ordering.EQUAL for a, b in gaps)
    if d.covers is not None:
        return None
    return all(iv.is_degenerate() for iv in d.limsup)


# ---------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class FunSeq:
    """``n -> f_n`` for ``n >= 1`` plus optional closed-form metadata.

    ``support`` describes sets ``E_n`` containing the support of ``f_n``;
    ``floor`` is a constant, or a function of ``x``, with
    ``|f_n(x)| >= |floor|`` for every ``x`` in ``E_n``.  ``disjoint_group`` tags families whose members, at each ``n``,
    have supports with disjoint interiors.  ``live(k)`` yields candidate
    indices where ``f_n`` is nonzero.
    """

    name: str
    domain: Domain
    generator: Callable[[int], PwExpFun]
    support_measure: ClosedForm | None = None
    sup_norm: ClosedForm | None = None
    l1: ClosedForm | None = None
    support: StructuredSetSeq | None = None
    floor: MonomialSum | Callable[[Fraction], MonomialSum] | None = None
    disjoint_group: str | None = None
    live: Callable[[], Iterable[int]] | None = None
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, n: int) -> PwExpFun:
        if n < 1:
            raise ValueError("sequences are indexed from 1")
        f = self.cache.get(n)
        if f is None:
            f = self.generator(n)
            if f.domain is not self.domain:
                raise DomainMismatch(f"{self.name}({n}) lives on {f.domain.value}")
            if len(self.cache) < 4096:
                self.cache[n] = f
        return f


def audit(F: FunSeq, horizon: int = 32, precision: int = 64) -> None:
    """Check every piece of metadata against direct computation for ``n <= horizon``."""
    for n in range(1, horizon + 1):
        f = F(n)
        if F.support_measure is not None:
            v = F.support_measure.formula(n)
            got = support_measure(f)
            if isinstance(v, Enclosure):
                if not v.overlaps(eval_enclosure(got, precision)):
                    raise AuditFailure(f"{F.name}: support measure at n={n}")
            elif compare(v, got) is not Ordering.EQUAL:
                raise AuditFailure(f"{F.name}: support measure {got} != {v} at n={n}")
        if F.sup_norm is not None:
            want = F.sup_norm.enclosure(n, precision)
            if not want.overlaps(ess_sup(f, precision=precision)):
                raise AuditFailure(f"{F.name}: sup norm at n={n}")
        if F.l1 is not None:
            want = F.l1.enclosure(n, precision)
            if not want.overlaps(l1_norm(f, precision)):
                raise AuditFailure(f"{F.name}: L1 norm at n={n}")
        if F.support is not None:
            sets = F.support(n)
            for p in f.pieces:
                if not any(_covers(s, p.interval) for s in sets):
                    raise AuditFailure(f"{F.name}: piece {p.interval} outside E_{n}")


def _covers(outer: Interval, inner: Interval) -> bool:
    from .pwfun import _pt_cmp

    return _pt_cmp(outer.lo, inner.lo) <= 0 and _pt_cmp(inner.hi, outer.hi) <= 0


def zero_seq(domain: Domain = Domain.UNIT) -> FunSeq:
    nil = ClosedForm(lambda n: MonomialSum(), Limit.ZERO, "identically 0")
    return FunSeq(
        name="zero",
        domain=domain,
        generator=lambda n: zero(domain),
        support_measure=nil,
        sup_norm=nil,
        l1=nil,
        support=StructuredSetSeq(domain, lambda n: (), EventuallyAvoids()),
    )


def truncate(F: FunSeq, N: int) -> FunSeq:
    """``F`` for ``n <= N`` and the zero function afterwards."""
    if N < 0:
        raise ValueError("N must be >= 0")

    def cut(cf: ClosedForm | None) -> ClosedForm | None:
        if cf is None:
            return None
        return ClosedForm(
            lambda n: cf.formula(n) if n <= N else MonomialSum(),
            Limit.ZERO,
            f"0 for n > {N}",
        )

    sets = None
    if F.support is not None:
        inner = F.support
        sets = StructuredSetSeq(F.domain, lambda n: inner(n) if n <= N else (), EventuallyAvoids())
    return FunSeq(
        name=f"truncate({F.name},{N})",
        domain=F.domain,
        generator=lambda n: F(n) if n <= N else zero(F.domain),
        support_measure=cut(F.support_measure),
        sup_norm=cut(F.sup_norm),
        l1=cut(F.l1),
        support=sets,
        floor=None,
        disjoint_group=F.disjoint_group,
        live=None,
    )


# ---------------------------------------------------------------------------
# verdicts


class Status(enum.Enum):
    CERTIFIED_CONVERGES = "CertifiedConverges"
    CERTIFIED_DIVERGES = "CertifiedDiverges"
    NO_COUNTEREXAMPLE_UP_TO = "NoCounterexampleUpTo"
    COUNTEREXAMPLE_AT = "CounterexampleAt"


@dataclass(frozen=True)
class ConvergenceVerdict:
    status: Status
    certificate: str
    horizon: int | None = None
    index: int | None = None
    details: tuple = ()

    @property
    def certified(self) -> bool:
        return self.status in (Status.CERTIFIED_CONVERGES, Status.CERTIFIED_DIVERGES)

    @property
    def says_converges(self) -> bool:
        return self.status in (Status.CERTIFIED_CONVERGES, Status.NO_COUNTEREXAMPLE_UP_TO)

    def __str__(self) -> str:
        extra = ""
        if self.status is Status.NO_COUNTEREXAMPLE_UP_TO:
            extra = f"({self.horizon})"
        elif self.status is Status.COUNTEREXAMPLE_AT:
            extra = f"(n={self.index})"
        return f"{self.status.value}{extra}: {self.certificate}"


def _converges(reason: str, **kw) -> ConvergenceVerdict:
    return ConvergenceVerdict(Status.CERTIFIED_CONVERGES, reason, **kw)


def _diverges(reason: str, **kw) -> ConvergenceVerdict:
    return ConvergenceVerdict(Status.CERTIFIED_DIVERGES, reason, **kw)


def _tail(N: int) -> range:
    return range(max(1, N // 2), N + 1)


# ---------------------------------------------------------------------------
# product metric


def d_metric(F: FunSeq, G: FunSeq, N: int, precision: int = 256) -> Enclosure:
    """``sum 2^-n u_n/(1+u_n)`` with ``u_n = rho(f_n, g_n)``, tail bounded by ``2^-N``."""
    if F.domain is not G.domain:
        raise DomainMismatch(f"{F.domain.value} vs {G.domain.value}")
    if N < 1:
        raise ValueError("N must be >= 1")
    lo = hi = Fraction(0)
    for n in range(1, N + 1):
        f, g = F(n), G(n)
        if f is g or f == g:
            continue
        u = rho(f, g, precision)
        w = Fraction(1, 2**n)
        lo += w * u.lo / (1 + u.lo)
        hi += w * u.hi / (1 + u.hi)
    return Enclosure(lo, hi + Fraction(1, 2**N), precision)


# ---------------------------------------------------------------------------
# convergence in measure


def check_in_measure(
    F: FunSeq,
    eps_grid: Sequence = (Fraction(1, 8), Fraction(1, 64)),
    horizon: int = DEFAULT_HORIZON,
    precision: int = 64,
    tol: Fraction = DEFAULT_TOL,
) -> ConvergenceVerdict:
    """Convergence in measure to 0."""
    eps_grid = [MonomialSum.coerce(Fraction(e) if isinstance(e, (int, str)) else e) for e in eps_grid]
    for e in eps_grid:
        if eval_enclosure(e, 64).lo <= 0:
            raise ValueError("eps values must be positive")
    sm = F.support_measure
    if sm is not None and sm.limit is Limit.ZERO:
        return _converges(f"m{{f_n != 0}} <= {sm.reason}")
    worst = None
    for n in range(1, horizon + 1):
        f = F(n)
        for e in eps_grid:
            m = superlevel_measure(f, e, precision)
            if n >= horizon // 2 and m.lo > tol:
                worst = (n, e, m)
    if worst is not None:
        n, e, m = worst
        return ConvergenceVerdict(
            Status.COUNTEREXAMPLE_AT,
            f"m{{|f_n| > {e}}} >= {m.lo} at n={n}",
            horizon=horizon,
            index=n,
            details=(("eps", str(e)), ("measure", str(m))),
        )
    return ConvergenceVerdict(
        Status.NO_COUNTEREXAMPLE_UP_TO,
        f"superlevel measures below {tol} on the tail up to {horizon}",
        horizon=horizon,
    )


# ---------------------------------------------------------------------------
# pointwise


def sample_values(F: FunSeq, xs: Sequence[Fraction], horizon: int) -> list[dict[int, MonomialSum]]:
    """Exact nonzero values ``f_n(x)`` for ``n <= horizon``; one dict ``n -> value`` per point."""
    xs = [Fraction(x) for x in xs]
    for x in xs:
        _check_point(F.domain, x)
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    sx = [xs[i] for i in order]
    out: list[dict[int, MonomialSum]] = [{} for _ in xs]
    for n in range(1, horizon + 1):
        for i, v in values_on_grid(F(n), sx).items():
            out[order[i]][n] = v
    return out


def value_counts(F: FunSeq, xs: Sequence[Fraction], horizon: int) -> list[Counter]:
    """Per point, how many ``n <= horizon`` give each exact value (zero included)."""
    counts = []
    for vals in sample_values(F, xs, horizon):
        c = Counter(vals.values())
        c[MonomialSum()] = horizon - len(vals)
        counts.append(c)
    return counts


def _certified_point(F: FunSeq, x: Fraction) -> ConvergenceVerdict | None:
    if F.sup_norm is not None and F.sup_norm.limit is Limit.ZERO:
        return _converges(f"|f_n(x)| <= ess sup |f_n| = {F.sup_norm.reason} -> 0")
    if F.support is None:
        return None
    m = limsup_membership(F.support, x)
    if m is Membership.NOT_IN_LIMSUP:
        return _converges(f"x = {x} lies in finitely many supports, so f_n(x) = 0 eventually")
    d = F.support.descriptor
    if m is not Membership.IN_LIMSUP or not isinstance(d, SweepsAll) or not d.misses_all or F.floor is None:
        return None
    floor = F.floor(x) if callable(F.floor) else F.floor
    if not eval_enclosure(floor, 64).excludes_zero():
        return None
    return _diverges(
        f"x = {x} lies in infinitely many supports, where |f_n(x)| >= |{floor}| > 0, "
        "and outside infinitely many, where f_n(x) = 0"
    )


def _horizon_point(x: Fraction, vals: dict[int, MonomialSum], horizon: int, tol) -> ConvergenceVerdict:
    tail = _tail(horizon)
    seen = [(n, eval_enclosure(vals[n], 64).mid) for n in tail if n in vals]
    big = [(n, v) for n, v in seen if abs(v) > tol]
    if big and len(seen) < len(tail):
        return ConvergenceVerdict(
            Status.COUNTEREXAMPLE_AT, f"f_n({x}) takes values > {tol} and 0 on the tail", horizon=horizon, index=big[-1][0]
        )
    if big:
        mids = [v for _, v in big]
        if max(mids) - min(mids) > tol:
            return ConvergenceVerdict(
                Status.COUNTEREXAMPLE_AT, f"f_n({x}) is not Cauchy on the tail", horizon=horizon, index=big[-1][0]
            )
    return ConvergenceVerdict(Status.NO_COUNTEREXAMPLE_UP_TO, f"f_n({x}) settles on the tail", horizon=horizon)


def check_pointwise(
    F: FunSeq,
    xs: Sequence | None = None,
    horizon: int = DEFAULT_HORIZON,
    tol: Fraction = DEFAULT_TOL,
) -> ConvergenceVerdict:
    """Pointwise behaviour at sample points; details hold one verdict per point."""
    xs = default_grid() if xs is None else [Fraction(x) for x in xs]
    for x in xs:
        _check_point(F.domain, x)
    per = [_certified_point(F, x) for x in xs]
    pending = [i for i, v in enumerate(per) if v is None]
    if pending:
        vals = sample_values(F, [xs[i] for i in pending], horizon)
        for i, v in zip(pending, vals):
            per[i] = _horizon_point(xs[i], v, horizon, tol)
    details = tuple((str(x), v) for x, v in zip(xs, per))
    for x, v in zip(xs, per):
        if v.status is Status.CERTIFIED_DIVERGES:
            return _diverges(f"at x = {x}: {v.certificate}", details=details)
    for x, v in zip(xs, per):
        if v.status is Status.COUNTEREXAMPLE_AT:
            return replace(v, certificate=f"at x = {x}: {v.certificate}", details=details)
    if all(v.status is Status.CERTIFIED_CONVERGES for v in per):
        reason = per[0].certificate if per else "no sample points"
        if F.support is not None and limsup_is_null(F.support):
            reason = "limsup of the supports is null; " + reason
        return _converges(reason, details=details)
    return ConvergenceVerdict(
        Status.NO_COUNTEREXAMPLE_UP_TO,
        f"no divergence seen at {len(xs)} points",
        horizon=horizon,
        details=details,
    )


# ---------------------------------------------------------------------------
# indicator sequences alpha_n * chi_{E_n}


class Mode(enum.Enum):
    POINTWISE = "pointwise"
    AE = "ae"
    UNIFORM = "uniform"


@lru_cache(maxsize=1 << 16)
def _abs_mid(alpha: Callable[[int], MonomialSum], n: int) -> Fraction:
    return abs(eval_enclosure(alpha(n), 64).mid)


@lru_cache(maxsize=1024)
def _first_zero(alpha: Callable[[int], MonomialSum], horizon: int) -> int | None:
    return next((n for n in range(1, horizon + 1) if alpha(n).is_zero()), None)


@lru_cache(maxsize=1024)
def detect_alpha_to_zero(alpha: Callable[[int], MonomialSum], horizon: int, tol: Fraction = DEFAULT_TOL) -> bool:
    """True when ``|alpha_n| <= tol`` across the tail, False when ``> tol`` across it."""
    mags = [_abs_mid(alpha, n) for n in _tail(horizon)]
    if max(mags) <= tol:
        return True
    if min(mags) > tol:
        return False
    raise HypothesisViolated("alpha_n neither tends to 0 nor stays away from 0 on the horizon")


def _dichotomy_points(E: StructuredSetSeq) -> tuple[list[Fraction], list[Fraction]]:
    top = 1 if E.domain is Domain.UNIT else 4
    generic = [Fraction(2 * k + 1, 64) * top for k in range(32)]
    special = [Fraction(k, 16) * top for k in range(17)]
    return generic, special


def dichotomy_oracle(
    alpha: Callable[[int], MonomialSum],
    E: StructuredSetSeq,
    horizon: int = DEFAULT_HORIZON,
    tol: Fraction = DEFAULT_TOL,
) -> dict[Mode, bool]:
    """Brute-force convergence of ``alpha_n chi_{E_n}`` to 0, read off the tail.

    A point diverges when it is hit on the tail by some ``n`` with
    ``|alpha_n| > tol``.  The a.e. mode looks at generic points only, the
    pointwise mode also at the special points ``k/16``.
    """
    return dict(_dichotomy_oracle(alpha, E, horizon, tol))


@lru_cache(maxsize=1024)
def _dichotomy_oracle(alpha, E: StructuredSetSeq, horizon: int, tol: Fraction) -> tuple:
    generic, special = _dichotomy_points(E)
    pts = sorted(set(generic) | set(special))
    gen_set = set(generic)
    hit_generic = hit_any = hit_uniform = False
    for n in _tail(horizon):
        sets = E(n)
        if not sets:
            raise HypothesisViolated(f"E_{n} is empty")
        if _abs_mid(alpha, n) <= tol:
            continue
        hit_uniform = True
        if hit_generic:
            break
        for iv in sets:
            lo, hi = iv.lo_q, iv.hi_q
            if lo is None:
                idx = [i for i, x in enumerate(pts) if iv.contains(x)]
            else:
                i0 = bisect_left(pts, lo) if iv.lo_closed else bisect_right(pts, lo)
                if iv.hi is None:
                    i1 = len(pts)
                elif hi is None:
                    i1 = max([i + 1 for i, x in enumerate(pts) if iv.contains(x)], default=i0)
                else:
                    i1 = bisect_right(pts, hi) if iv.hi_closed else bisect_left(pts, hi)
                idx = range(i0, i1)
            for i in idx:
                hit_any = True
                if pts[i] in gen_set:
                    hit_generic = True
    return ((Mode.POINTWISE, not hit_any), (Mode.AE, not hit_generic), (Mode.UNIFORM, not hit_uniform))


def check_indicator_dichotomy(
    alpha: Callable[[int], MonomialSum],
    E: StructuredSetSeq,
    mode: Mode | str,
    horizon: int = DEFAULT_HORIZON,
    alpha_to_zero: bool | None = None,
    tol: Fraction = DEFAULT_TOL,
) -> ConvergenceVerdict:
    """Closed-form verdict for ``alpha_n chi_{E_n} -> 0``, checked against the horizon."""
    mode = Mode(mode)
    z = _first_zero(alpha, horizon)
    if z is not None:
        raise HypothesisViolated(f"alpha_{z} = 0")
    if alpha_to_zero is None:
        alpha_to_zero = detect_alpha_to_zero(alpha, horizon, tol)
    if alpha_to_zero:
        reason = "alpha_n -> 0 and |f_n| <= |alpha_n|"
        ok = True
    elif mode is Mode.UNIFORM:
        ok, reason = False, "alpha_n does not tend to 0 and every E_n is nonempty"
    elif mode is Mode.POINTWISE:
        empty = limsup_is_empty(E)
        if empty is None:
            raise HypothesisViolated("descriptor cannot decide whether limsup E_n is empty")
        ok = empty
        reason = "limsup E_n is empty" if ok else "alpha_n stays away from 0 on a nonempty limsup E_n"
    else:
        null = limsup_is_null(E)
        if null is None:
            raise HypothesisViolated("descriptor cannot decide the measure of limsup E_n")
        ok = null
        reason = "limsup E_n is null" if ok else "alpha_n stays away from 0 on limsup E_n of positive measure"
    brute = dichotomy_oracle(alpha, E, horizon, tol)[mode]
    details = (("mode", mode.value), ("alpha_to_zero", alpha_to_zero), ("horizon_converges", brute), ("agrees", brute == ok))
    return (_converges if ok else _diverges)(reason, horizon=horizon, details=details)


# ---------------------------------------------------------------------------
# uniform, almost uniform and L1


def _norm_check(F: FunSeq, cf: ClosedForm | None, compute, label: str, horizon: int, tol) -> ConvergenceVerdict:
    if cf is not None:
        if cf.limit is Limit.ZERO:
            return _converges(f"{label} = {cf.reason} -> 0")
        return _diverges(f"{label} = {cf.reason} ({cf.limit.value})")
    worst = None
    for n in range(1, horizon + 1):
        v = compute(F(n))
        if n >= horizon // 2 and v.lo > tol:
            worst = (n, v)
    if worst is not None:
        return ConvergenceVerdict(
            Status.COUNTEREXAMPLE_AT, f"{label} >= {worst[1].lo} at n={worst[0]}", horizon=horizon, index=worst[0]
        )
    return ConvergenceVerdict(Status.NO_COUNTEREXAMPLE_UP_TO, f"{label} <= {tol} on the tail", horizon=horizon)


def check_uniform(F: FunSeq, horizon: int = DEFAULT_HORIZON, precision: int = 64, tol: Fraction = DEFAULT_TOL) -> ConvergenceVerdict:
    """Uniform a.e. convergence to 0 (ess sup over the whole domain)."""
    return _norm_check(F, F.sup_norm, lambda f: ess_sup(f, precision=precision), "ess sup |f_n|", horizon, tol)


def check_l1(F: FunSeq, horizon: int = DEFAULT_HORIZON, precision: int = 64, tol: Fraction = DEFAULT_TOL) -> ConvergenceVerdict:
    """Convergence to 0 in L1 norm."""
    return _norm_check(F, F.l1, lambda f: l1_norm(f, precision), "||f_n||_1", horizon, tol)


def _high_set(f: PwExpFun, height: Fraction, precision: int) -> list[Interval]:
    """Pieces on which ``|f| > height`` holds everywhere (certified)."""
    out = []
    for p in f.pieces:
        lo = _piece_min_abs(p, precision)
        if lo is not None and lo > height:
            out.append(p.interval)
    return out


def _piece_min_abs(p, precision: int) -> Fraction | None:
    if p.is_constant():
        e = eval_enclosure(p.constant_value(), precision)
        return min(abs(e.lo), abs(e.hi)) if e.sign() else None
    if len(p.expr) == 1 and p.interval.is_rational() and p.interval.hi is not None:
        a = eval_enclosure(p.value_at(p.interval.lo_q), precision)
        b = eval_enclosure(p.value_at(p.interval.hi_q), precision)
        if a.sign() and a.sign() == b.sign():
            return min(abs(a.lo), abs(a.hi), abs(b.lo), abs(b.hi))
    return None


def check_almost_uniform(
    F: FunSeq,
    eps,
    horizon: int = DEFAULT_HORIZON,
    precision: int = 64,
    height: Fraction = Fraction(1, 2),
) -> ConvergenceVerdict:
    """Almost uniform convergence to 0 on [0, 1].

    Templates, in order: sup norm tending to 0 (E empty); supports shrinking
    to 0 (E = [0, eps/2]); otherwise blocks of indices whose sets
    ``{|f_n| > height}`` are pairwise disjoint with total measure >= eps,
    each of which beats any E with m(E) < eps.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if F.domain is not Domain.UNIT:
        raise DomainMismatch("almost uniform convergence is checked on [0, 1]")
    if F.sup_norm is not None and F.sup_norm.limit is Limit.ZERO:
        return _converges(f"E = empty set; ess sup |f_n| = {F.sup_norm.reason} -> 0", details=(("E", "[]"),))
    if F.support is not None and isinstance(F.support.descriptor, ShrinksToNull):
        delta = eps / 2
        n0 = F.support.descriptor.first_below(delta)
        return _converges(
            f"E = [0, {delta}], m(E) = {delta} < {eps}; f_n = 0 on ({delta}, 1] for n >= {n0}",
            index=n0,
            details=(("E", f"[0, {delta}]"), ("n0", n0)),
        )
    blocks = []
    cur: list[Interval] = []
    cur_start = None
    cur_measure = Fraction(0)
    for n in range(1, horizon + 1):
        hs = _high_set(F(n), height, precision)
        if not hs:
            continue
        if any(a.intersect(b) is not None for a in hs for b in cur):
            cur, cur_start, cur_measure = [], None, Fraction(0)
        if cur_start is None:
            cur_start = n
        cur.extend(hs)
        cur_measure += sum((iv.length().as_rational() or Fraction(0)) for iv in hs)
        if cur_measure >= eps:
            blocks.append((cur_start, n))
            cur, cur_start, cur_measure = [], None, Fraction(0)
    if len(blocks) >= 2:
        start, end = blocks[-1]
        return ConvergenceVerdict(
            Status.COUNTEREXAMPLE_AT,
            f"{len(blocks)} index blocks up to {horizon} each have disjoint sets |f_n| > {height} "
            f"of total measure >= {eps}; any E with m(E) < {eps} misses part of one in every block",
            horizon=horizon,
            index=start,
            details=(("blocks", len(blocks)), ("last_block", (start, end))),
        )
    return ConvergenceVerdict(
        Status.NO_COUNTEREXAMPLE_UP_TO, f"fewer than two escaping blocks up to {horizon}", horizon=horizon
    )
