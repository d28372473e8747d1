"""Piecewise exponential-sum functions on [0, 1] or [0, +inf).

A :class:`PwExpFun` is a finite list of pieces.  Each piece carries an
interval and an expression ``x -> sum(coef_i * exp(rate_i * x))`` whose
coefficients are :class:`MonomialSum` values and whose rates are
:class:`LinearForm` values.  Off the pieces the function is 0.

Functions are treated as a.e. classes: piece algebra ignores what happens on
finite endpoint sets, and structural equality is on canonical pieces.
"""

from __future__ import annotations

import enum
import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

from ._ival import Ival, ival_sum
from .exactreal import (
    Enclosure,
    LinearForm,
    MonomialSum,
    Ordering,
    compare,
    eval_enclosure,
    eval_ival,
    sign_of,
    symbolic_log,
)


class OutOfDomain(ValueError):
    pass


class DomainMismatch(ValueError):
    pass


class NonIntegrable(ValueError):
    pass


class EmptyRegion(ValueError):
    pass


class Domain(enum.Enum):
    UNIT = "unit"
    HALF_LINE = "half-line"


def _ms(x) -> MonomialSum:
    return MonomialSum.coerce(Fraction(x) if isinstance(x, (int, float)) and not isinstance(x, bool) else x)


def _pt_cmp(a: MonomialSum | None, b: MonomialSum | None) -> int:
    """Order on endpoints; ``None`` stands for +inf."""
    if a is None:
        return 0 if b is None else 1
    if b is None:
        return -1
    qa, qb = a.as_rational(), b.as_rational()
    if qa is not None and qb is not None:
        d = qa.numerator * qb.denominator - qb.numerator * qa.denominator
        return (d > 0) - (d < 0)
    o = compare(a, b)
    if o is Ordering.INDETERMINATE:
        raise ArithmeticError(f"cannot order endpoints {a} and {b}")
    return {Ordering.LESS: -1, Ordering.EQUAL: 0, Ordering.GREATER: 1}[o]


# ---------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class Interval:
    lo: MonomialSum
    hi: MonomialSum | None  # None is +inf
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", _ms(self.lo))
        if self.hi is not None:
            object.__setattr__(self, "hi", _ms(self.hi))
        if _pt_cmp(self.lo, self.hi) > 0:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @property
    def lo_q(self) -> Fraction | None:
        return self.lo.as_rational()

    @property
    def hi_q(self) -> Fraction | None:
        return None if self.hi is None else self.hi.as_rational()

    def is_rational(self) -> bool:
        return self.lo_q is not None and self.hi_q is not None

    def is_degenerate(self) -> bool:
        return self.hi is not None and _pt_cmp(self.lo, self.hi) == 0

    def length(self) -> MonomialSum:
        if self.hi is None:
            raise NonIntegrable("unbounded interval has infinite length")
        lo, hi = self.lo.as_rational(), self.hi.as_rational()
        if lo is not None and hi is not None:
            return MonomialSum.const(hi - lo)
        return self.hi - self.lo

    def contains(self, x) -> bool:
        x = _ms(x)
        c_lo = _pt_cmp(self.lo, x)
        if c_lo > 0 or (c_lo == 0 and not self.lo_closed):
            return False
        c_hi = _pt_cmp(x, self.hi)
        return c_hi < 0 or (c_hi == 0 and self.hi_closed)

    def intersect(self, other: "Interval") -> "Interval | None":
        lo = self.lo if _pt_cmp(self.lo, other.lo) >= 0 else other.lo
        hi = self.hi if _pt_cmp(self.hi, other.hi) <= 0 else other.hi
        if _pt_cmp(lo, hi) >= 0:
            return None
        return Interval(lo, hi)

    def __str__(self) -> str:
        hi = "+inf)" if self.hi is None else f"{self.hi}" + ("]" if self.hi_closed else ")")
        return ("[" if self.lo_closed else "(") + f"{self.lo}, " + hi


def interval(lo, hi) -> Interval:
    return Interval(_ms(lo), None if hi is None else _ms(hi))


Region = Sequence[Interval]


def region_measure(region: Region) -> MonomialSum:
    """Measure of a union of intervals with pairwise disjoint interiors."""
    exact, rest = Fraction(0), MonomialSum()
    for iv in region:
        lo, hi = iv.lo_q, iv.hi_q
        if lo is not None and hi is not None:
            exact += hi - lo
        else:
            rest = rest + iv.length()
    return rest + exact if exact else rest


# ---------------------------------------------------------------------------
# expressions: tuple of (coef, rate) sorted by rate, no zero coefficients

Expr = tuple[tuple[MonomialSum, LinearForm], ...]


def _expr(pairs: Iterable[tuple[MonomialSum, LinearForm]]) -> Expr:
    acc: dict[LinearForm, MonomialSum] = {}
    for coef, rate in pairs:
        acc[rate] = acc[rate] + coef if rate in acc else coef
    out = [(c, r) for r, c in acc.items() if not c.is_zero()]
    out.sort(key=lambda cr: cr[1].coeffs)
    return tuple(out)


def _expr_scale(e: Expr, a: MonomialSum) -> Expr:
    if a.is_zero():
        return ()
    return _expr((c * a, r) for c, r in e)


def _expr_mul(e1: Expr, e2: Expr) -> Expr:
    return _expr((c1 * c2, r1 + r2) for c1, r1 in e1 for c2, r2 in e2)


def _expr_str(e: Expr) -> str:
    parts = []
    for c, r in e:
        cs = str(c)
        if len(c.terms) > 1:
            cs = f"({cs})"
        parts.append(cs if not r else f"{cs}*exp(({r})*x)")
    return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class ExpPiece:
    interval: Interval
    expr: Expr

    def is_constant(self) -> bool:
        return len(self.expr) == 1 and not self.expr[0][1]

    def is_indicator(self) -> bool:
        return self.is_constant() and self.expr[0][0].as_rational() == 1

    def constant_value(self) -> MonomialSum | None:
        return self.expr[0][0] if self.is_constant() else None

    def value_at(self, q: Fraction) -> MonomialSum:
        total = MonomialSum()
        for c, r in self.expr:
            total = total + (c if not r else c * MonomialSum.exp(r * q))
        return total

    def __str__(self) -> str:
        return f"{self.interval}: {_expr_str(self.expr)}"


@dataclass(frozen=True)
class PwExpFun:
    domain: Domain
    pieces: tuple[ExpPiece, ...] = ()

    def is_zero(self) -> bool:
        return not self.pieces

    def breakpoints(self) -> list[MonomialSum]:
        pts = []
        for p in self.pieces:
            pts.append(p.interval.lo)
            if p.interval.hi is not None:
                pts.append(p.interval.hi)
        return pts

    def __add__(self, other: "PwExpFun") -> "PwExpFun":
        return linear_combine(1, self, 1, other)

    def __sub__(self, other: "PwExpFun") -> "PwExpFun":
        return linear_combine(1, self, -1, other)

    def __neg__(self) -> "PwExpFun":
        return linear_combine(-1, self, 0, zero(self.domain))

    def __mul__(self, other) -> "PwExpFun":
        if isinstance(other, PwExpFun):
            return multiply(self, other)
        return linear_combine(other, self, 0, zero(self.domain))

    __rmul__ = __mul__

    def __str__(self) -> str:
        if not self.pieces:
            return "0"
        return "; ".join(str(p) for p in self.pieces)


_ZERO_PT, _ONE_PT = MonomialSum(), MonomialSum.const(1)


def _check_domain(domain: Domain, iv: Interval) -> None:
    if _pt_cmp(iv.lo, _ZERO_PT) < 0:
        raise OutOfDomain(f"piece {iv} starts below 0")
    if domain is Domain.UNIT and _pt_cmp(iv.hi, _ONE_PT) > 0:
        raise OutOfDomain(f"piece {iv} leaves [0, 1]")


def make(domain: Domain, pieces: Iterable[ExpPiece]) -> PwExpFun:
    """Canonical function: empty and degenerate pieces dropped, sorted."""
    kept = []
    for p in pieces:
        if not p.expr or p.interval.is_degenerate():
            continue
        _check_domain(domain, p.interval)
        kept.append(p)
    kept.sort(key=cmp_to_key(lambda a, b: _pt_cmp(a.interval.lo, b.interval.lo)))
    for a, b in zip(kept, kept[1:]):
        if _pt_cmp(a.interval.hi, b.interval.lo) > 0:
            raise ValueError(f"overlapping pieces {a.interval} and {b.interval}")
    return PwExpFun(domain, tuple(kept))


def zero(domain: Domain = Domain.UNIT) -> PwExpFun:
    return PwExpFun(domain)


def indicator(lo, hi, value=1, domain: Domain = Domain.UNIT) -> PwExpFun:
    """``value * chi_[lo, hi]``."""
    v = _ms(value)
    return make(domain, [ExpPiece(interval(lo, hi), _expr([(v, LinearForm())]))])


def exp_piece(lo, hi, coef, rate: LinearForm, domain: Domain = Domain.UNIT) -> PwExpFun:
    """``coef * exp(rate * x) * chi_[lo, hi]``."""
    return make(domain, [ExpPiece(interval(lo, hi), _expr([(_ms(coef), rate)]))])


def from_expr(lo, hi, expr: Iterable[tuple[MonomialSum, LinearForm]], domain: Domain = Domain.UNIT) -> PwExpFun:
    return make(domain, [ExpPiece(interval(lo, hi), _expr(expr))])


# ---------------------------------------------------------------------------
# algebra


def _overlay(fs: Sequence[PwExpFun]):
    """Common refinement: yields (segment interval, [piece or None per f])."""
    pts: list = []
    seen = set()
    for f in fs:
        for p in f.breakpoints():
            if p not in seen:
                seen.add(p)
                pts.append(p)
    has_inf = any(p.interval.hi is None for f in fs for p in f.pieces)
    pts.sort(key=cmp_to_key(_pt_cmp))
    merged: list = []
    for p in pts:
        if merged and _pt_cmp(merged[-1], p) == 0:
            continue
        merged.append(p)
    if has_inf:
        merged.append(None)
    rank = {p: i for i, p in enumerate(merged) if p is not None}
    inf_rank = len(merged) - 1

    cover: list[list] = [[None] * len(fs) for _ in range(max(len(merged) - 1, 0))]
    for k, f in enumerate(fs):
        for piece in f.pieces:
            a = rank[piece.interval.lo]
            b = inf_rank if piece.interval.hi is None else rank[piece.interval.hi]
            for s in range(a, b):
                cover[s][k] = piece
    for s, row in enumerate(cover):
        if any(x is not None for x in row):
            yield Interval(merged[s], merged[s + 1]), row


def linear_combine(a, f: PwExpFun, b, g: PwExpFun) -> PwExpFun:
    """Exact ``a*f + b*g`` on the common refinement of both piece sets."""
    if f.domain is not g.domain:
        raise DomainMismatch(f"{f.domain.value} vs {g.domain.value}")
    a, b = _ms(a), _ms(b)
    fs = [h for h, s in ((f, a), (g, b)) if not s.is_zero()]
    ss = [s for s in (a, b) if not s.is_zero()]
    pieces = []
    for seg, row in _overlay(fs):
        pairs = []
        for piece, s in zip(row, ss):
            if piece is not None:
                pairs.extend((c * s, r) for c, r in piece.expr)
        pieces.append(ExpPiece(seg, _expr(pairs)))
    return make(f.domain, pieces)


def combine(coefs: Sequence, fs: Sequence[PwExpFun], domain: Domain | None = None) -> PwExpFun:
    """``sum(coefs[i] * fs[i])`` on one common refinement."""
    if not fs:
        return zero(domain or Domain.UNIT)
    dom = fs[0].domain
    for f in fs:
        if f.domain is not dom:
            raise DomainMismatch(f"{f.domain.value} vs {dom.value}")
    cs = [_ms(c) for c in coefs]
    live = [(c, f) for c, f in zip(cs, fs) if not c.is_zero() and not f.is_zero()]
    pieces = []
    for seg, row in _overlay([f for _, f in live]):
        pairs = []
        for piece, (c, _) in zip(row, live):
            if piece is not None:
                pairs.extend((k * c, r) for k, r in piece.expr)
        pieces.append(ExpPiece(seg, _expr(pairs)))
    return make(dom, pieces)


def multiply(f: PwExpFun, g: PwExpFun) -> PwExpFun:
    """Exact pointwise product: supports intersect, rates add."""
    if f.domain is not g.domain:
        raise DomainMismatch(f"{f.domain.value} vs {g.domain.value}")
    if f.is_zero() or g.is_zero():
        return zero(f.domain)
    pieces = []
    for seg, (p, q) in _overlay([f, g]):
        if p is not None and q is not None:
            pieces.append(ExpPiece(seg, _expr_mul(p.expr, q.expr)))
    return make(f.domain, pieces)


def power(f: PwExpFun, m: int) -> PwExpFun:
    if m < 1:
        raise ValueError("power exponent must be >= 1")
    out = f
    for _ in range(m - 1):
        out = multiply(out, f)
    return out


def ae_equal(f: PwExpFun, g: PwExpFun) -> bool:
    """Equality as a.e. classes: ``f - g`` has no pieces."""
    return linear_combine(1, f, -1, g).is_zero()


# ---------------------------------------------------------------------------
# evaluation


def _in_domain(f: PwExpFun, x: MonomialSum) -> None:
    if _pt_cmp(x, MonomialSum()) < 0 or (f.domain is Domain.UNIT and _pt_cmp(x, MonomialSum.const(1)) > 0):
        raise OutOfDomain(f"x = {x} outside {f.domain.value}")


def value_at(f: PwExpFun, x) -> MonomialSum:
    """Exact symbolic value at a rational point."""
    x = _ms(x)
    q = x.as_rational()
    if q is None:
        raise ValueError("symbolic evaluation needs a rational point")
    _in_domain(f, x)
    total = MonomialSum()
    for p in f.pieces:
        if p.interval.contains(x):
            total = total + p.value_at(q)
    return total


def evaluate(f: PwExpFun, x, precision: int = 256) -> Enclosure:
    """Enclosure of ``f(x)``; exact when the value is rational."""
    x = _ms(x)
    if x.as_rational() is not None:
        return eval_enclosure(value_at(f, x), precision)
    _in_domain(f, x)
    prec = precision + 16
    xv = eval_ival(x, prec)
    total = Ival.exact(0, prec)
    for p in f.pieces:
        if p.interval.contains(x):
            total = total + _compile(p, prec).at(xv)
    return Enclosure(total.lo(), total.hi(), precision)


def values_on_grid(f: PwExpFun, xs: Sequence[Fraction]) -> dict[int, MonomialSum]:
    """Exact nonzero values of ``f`` at sorted rational points, by index."""
    out: dict[int, MonomialSum] = {}
    for p in f.pieces:
        lo, hi = p.interval.lo_q, p.interval.hi_q
        if lo is None or (hi is None and p.interval.hi is not None):
            idx = [i for i, x in enumerate(xs) if p.interval.contains(x)]
        else:
            i0 = bisect_left(xs, lo) if p.interval.lo_closed else bisect_right(xs, lo)
            if hi is None:
                i1 = len(xs)
            else:
                i1 = bisect_right(xs, hi) if p.interval.hi_closed else bisect_left(xs, hi)
            idx = range(i0, i1)
        cv = p.constant_value()
        for i in idx:
            v = cv if cv is not None else p.value_at(xs[i])
            out[i] = out[i] + v if i in out else v
    return {i: v for i, v in out.items() if not v.is_zero()}


# ---------------------------------------------------------------------------
# numeric piece kernels


class _Compiled:
    """Interval images of a piece's coefficients and rates at one precision."""

    __slots__ = ("terms", "prec")

    def __init__(self, terms, prec):
        self.terms = terms
        self.prec = prec

    def at(self, x: Ival) -> Ival:
        total = Ival.exact(0, self.prec)
        for c, r in self.terms:
            total = total + (c if r is None else c * (r * x).exp())
        return total

    def deriv(self, x: Ival) -> Ival:
        total = Ival.exact(0, self.prec)
        for c, r in self.terms:
            if r is not None:
                total = total + c * r * (r * x).exp()
        return total

    def antideriv_diff(self, a: Ival, b: Ival) -> Ival:
        """Enclosure of ``integral_a^b`` of the piece expression."""
        total = Ival.exact(0, self.prec)
        for c, r in self.terms:
            if r is None:
                total = total + c * (b - a)
            else:
                total = total + c * ((r * b).exp() - (r * a).exp()) / r
        return total


def _compile(piece: ExpPiece, prec: int) -> _Compiled:
    terms = []
    for c, r in piece.expr:
        terms.append((eval_ival(c, prec), r.value(prec) if r else None))
    return _Compiled(terms, prec)


def _iv_pt(q: Fraction, prec: int) -> Ival:
    return Ival.exact(q, prec)


def _iv_box(a: Fraction, b: Fraction, prec: int) -> Ival:
    return Ival.hull_of(a, b, prec)


def _search_tol(prec: int) -> Fraction:
    return Fraction(1, 2 ** min(prec // 2, 50))


def _quad_tol(prec: int) -> Fraction:
    return Fraction(1, 2 ** (prec // 2))


def _rate_signs(piece: ExpPiece, prec: int) -> list[int]:
    out = []
    for _, r in piece.expr:
        if not r:
            out.append(0)
        else:
            s = r.value(prec).sign()
            if s is None:
                raise ArithmeticError(f"cannot sign rate {r}")
            out.append(s)
    return out


def _finite_cut(piece: ExpPiece, level: Fraction, prec: int) -> Fraction:
    """Rational ``X >= lo`` past which ``sum |c_i| e^{r_i x}/w_i`` is below ``level``.

    Requires every rate to be negative.
    """
    comp = _compile(piece, prec)
    lo = piece.interval.lo_q
    if lo is None:
        raise ValueError("unbounded pieces need a rational left endpoint")
    step = Fraction(1)
    x = lo + step
    while True:
        xv = _iv_pt(x, prec)
        bound = ival_sum((abs(c) * (r * xv).exp() * (Ival.exact(1, prec) + 1 / abs(r)) for c, r in comp.terms), prec)
        if bound.lt(level):
            return x
        step *= 2
        x = lo + step


def _require_decay(piece: ExpPiece, prec: int) -> None:
    if piece.interval.hi is None and any(s >= 0 for s in _rate_signs(piece, prec)):
        raise NonIntegrable(f"piece {piece} does not decay on an unbounded interval")


# ---------------------------------------------------------------------------
# superlevel measure


def _abs_ms(c: MonomialSum) -> MonomialSum | None:
    s = sign_of(c)
    if s is None:
        return None
    return -c if s < 0 else c


def _clip_length(iv: Interval, cut: MonomialSum, keep_right: bool) -> MonomialSum:
    """Exact length of ``iv`` intersected with ``(cut, inf)`` or ``(-inf, cut)``."""
    lo, hi = iv.lo, iv.hi
    if keep_right:
        if hi is None:
            raise NonIntegrable("superlevel set is unbounded")
        start = cut if _pt_cmp(cut, lo) > 0 else lo
        return MonomialSum() if _pt_cmp(start, hi) >= 0 else hi - start
    end = cut if hi is None or _pt_cmp(cut, hi) < 0 else hi
    return MonomialSum() if _pt_cmp(end, lo) <= 0 else end - lo


def _superlevel_piece(piece: ExpPiece, eps: MonomialSum, prec: int) -> Enclosure:
    iv = piece.interval
    if piece.is_constant():
        c = _abs_ms(piece.expr[0][0])
        o = Ordering.INDETERMINATE if c is None else compare(c, eps)
        if o is Ordering.GREATER:
            return eval_enclosure(iv.length(), prec)
        if o in (Ordering.LESS, Ordering.EQUAL):
            return Enclosure.exact(0, prec)
        return Enclosure(Fraction(0), eval_enclosure(iv.length(), prec).hi, prec)

    if len(piece.expr) == 1:
        coef, rate = piece.expr[0]
        rs = _rate_signs(piece, prec)[0]
        c = _abs_ms(coef)
        # crossing: |c| e^{r x} = eps  <=>  x = log(eps/|c|) / r
        if c is not None and c.is_monomial():
            form = symbolic_log(eps / c)
            q = None if form is None else form.ratio(rate)
            if q is not None:
                cut = MonomialSum.const(q)
                return eval_enclosure(_clip_length(iv, cut, keep_right=rs > 0), prec)
        w = prec + 16
        ci = abs(eval_ival(coef, w))
        cross = (eval_ival(eps, w) / ci).log() / rate.value(w)
        lo_cut, hi_cut = cross.lo(), cross.hi()
        a = _clip_length(iv, MonomialSum.const(hi_cut if rs > 0 else lo_cut), rs > 0)
        b = _clip_length(iv, MonomialSum.const(lo_cut if rs > 0 else hi_cut), rs > 0)
        ea, eb = eval_enclosure(a, prec), eval_enclosure(b, prec)
        return Enclosure(min(ea.lo, eb.lo), max(ea.hi, eb.hi), prec)

    return _superlevel_bisect(piece, eps, prec)


def _superlevel_bisect(piece: ExpPiece, eps: MonomialSum, prec: int) -> Enclosure:
    w = prec + 16
    a, b = piece.interval.lo_q, piece.interval.hi_q
    if a is None or (b is None and piece.interval.hi is not None):
        raise ValueError("multi-term pieces need rational endpoints")
    eps_iv = eval_ival(eps, w)
    if b is None:
        _require_decay(piece, w)
        b = _finite_cut(piece, eps_iv.lo() / 2, w)
    comp = _compile(piece, w)
    tol = _search_tol(prec)
    sure, unsure = Fraction(0), Fraction(0)
    stack = [(a, b)]
    while stack:
        u, v = stack.pop()
        val = abs(comp.at(_iv_box(u, v, w)))
        if val.gt(eps_iv):
            sure += v - u
        elif val.lt(eps_iv) or (val.le(eps_iv) and val.hi() == eps_iv.lo()):
            continue
        elif v - u <= tol:
            unsure += v - u
        else:
            m = (u + v) / 2
            stack.extend([(u, m), (m, v)])
    return Enclosure(sure, sure + unsure, prec)


def superlevel_measure(f: PwExpFun, eps, precision: int = 256) -> Enclosure:
    """Enclosure of the measure of ``{x : |f(x)| > eps}``."""
    eps = _ms(eps)
    if sign_of(eps) != 1:
        raise ValueError("eps must be positive")
    lo = hi = Fraction(0)
    for p in f.pieces:
        e = _superlevel_piece(p, eps, precision)
        lo, hi = lo + e.lo, hi + e.hi
    return Enclosure(lo, hi, precision)


def support_measure(f: PwExpFun) -> MonomialSum:
    """Exact measure of the support (pieces only vanish on null sets)."""
    return region_measure([p.interval for p in f.pieces])


# ---------------------------------------------------------------------------
# L1 norm


def _l1_piece_exact(piece: ExpPiece) -> MonomialSum | None:
    iv = piece.interval
    if piece.is_constant():
        c = _abs_ms(piece.expr[0][0])
        if c is None:
            return None
        if iv.hi is None:
            raise NonIntegrable(f"nonzero constant on {iv}")
        return c * iv.length()
    if len(piece.expr) != 1:
        return None
    coef, rate = piece.expr[0]
    c = _abs_ms(coef)
    if c is None or not rate.is_constant():
        return None
    r = rate.constant
    a = iv.lo_q
    if a is None:
        return None
    fa = MonomialSum.exp(rate * a)
    if iv.hi is None:
        if r >= 0:
            raise NonIntegrable(f"piece {piece} does not decay on an unbounded interval")
        return c * fa * (1 / -r)
    b = iv.hi_q
    if b is None:
        return None
    fb = MonomialSum.exp(rate * b)
    diff = fb - fa if r > 0 else fa - fb
    return c * diff * (1 / abs(r))


def l1_exact(f: PwExpFun) -> MonomialSum | None:
    """Closed-form ``||f||_1`` when every piece admits one, else None."""
    total = MonomialSum()
    for p in f.pieces:
        v = _l1_piece_exact(p)
        if v is None:
            return None
        total = total + v
    return total


def _signed_segments(comp: _Compiled, a: Fraction, b: Fraction, prec: int, tol: Fraction):
    """Bisect [a, b] into segments of certified sign and tiny unsigned ones."""
    stack = [(a, b)]
    while stack:
        u, v = stack.pop()
        val = comp.at(_iv_box(u, v, prec))
        s = val.sign()
        if s is not None:
            yield u, v, s, val
        elif v - u <= tol:
            yield u, v, None, val
        else:
            m = (u + v) / 2
            stack.extend([(m, v), (u, m)])


def _l1_piece_numeric(piece: ExpPiece, prec: int) -> Ival:
    w = prec + 16
    iv = piece.interval
    comp = _compile(piece, w)
    if len(piece.expr) == 1:
        if iv.hi is None:
            _require_decay(piece, w)
            c, r = comp.terms[0]
            a = eval_ival(iv.lo, w)
            return abs(c) * (r * a).exp() / abs(r)
        a, b = eval_ival(iv.lo, w), eval_ival(iv.hi, w)
        return abs(comp.antideriv_diff(a, b))
    a, b = iv.lo_q, iv.hi_q
    if a is None or (b is None and iv.hi is not None):
        raise ValueError("multi-term pieces need rational endpoints")
    tol = _quad_tol(prec)
    tail = Ival.exact(0, w)
    if b is None:
        _require_decay(piece, w)
        b = _finite_cut(piece, tol / 4, w)
        bv = _iv_pt(b, w)
        bound = ival_sum((abs(c) * (r * bv).exp() / abs(r) for c, r in comp.terms), w)
        tail = Ival(Ival.exact(0, w).a, bound.b, w)
    seg_tol = tol / 4 / max(b - a, 1)
    total = tail
    for u, v, s, val in _signed_segments(comp, a, b, w, seg_tol):
        integral = comp.antideriv_diff(_iv_pt(u, w), _iv_pt(v, w))
        if s is not None:
            total = total + (integral if s > 0 else -integral)
        else:
            upper = abs(val) * (v - u)
            total = total + Ival(abs(integral).a, upper.b, w)
    return total


def l1_norm(f: PwExpFun, precision: int = 256) -> Enclosure:
    """Enclosure of ``integral |f|``; exact when a closed form exists."""
    lo = hi = Fraction(0)
    for p in f.pieces:
        exact = _l1_piece_exact(p)
        if exact is not None:
            e = eval_enclosure(exact, precision)
        else:
            x = _l1_piece_numeric(p, precision)
            e = Enclosure(x.lo(), x.hi(), precision)
        lo, hi = lo + e.lo, hi + e.hi
    return Enclosure(lo, hi, precision)


# ---------------------------------------------------------------------------
# essential supremum


def _max_on(comp: _Compiled, a: Fraction, b: Fraction, prec: int, tol: Fraction) -> Ival:
    """Branch-and-bound enclosure of ``max f`` on [a, b].

    Boxes where the derivative has a certified sign resolve to an endpoint
    value; the rest are bounded with the mean-value form and split until
    the gap to the best known value is below ``tol``.
    """
    fa, fb = comp.at(_iv_pt(a, prec)), comp.at(_iv_pt(b, prec))
    best_lo = max(fa.lo(), fb.lo())
    upper_final = max(fa.hi(), fb.hi())
    heap: list = [(-float("inf"), a, b)]
    while heap:
        _, u, v = heapq.heappop(heap)
        box = _iv_box(u, v, prec)
        d = comp.deriv(box)
        ds = d.sign()
        if ds is not None:
            end = v if ds > 0 else u
            val = comp.at(_iv_pt(end, prec))
            best_lo = max(best_lo, val.lo())
            upper_final = max(upper_final, val.hi())
            continue
        m = (u + v) / 2
        fm = comp.at(_iv_pt(m, prec))
        best_lo = max(best_lo, fm.lo())
        mv = fm + d * (box - m)
        nat = comp.at(box)
        up = min(mv.hi(), nat.hi())
        if up <= best_lo:
            continue
        if up - best_lo <= tol or v - u <= tol * tol:
            upper_final = max(upper_final, up)
            continue
        for uu, vv in ((u, m), (m, v)):
            heapq.heappush(heap, (-float(up), uu, vv))
    upper_final = max(upper_final, best_lo)
    return Ival.hull_of(best_lo, upper_final, prec)


def _abs_sup_piece(piece: ExpPiece, sub: Interval, prec: int) -> Enclosure:
    if piece.is_constant():
        c = piece.expr[0][0]
        e = eval_enclosure(c, prec)
        if e.lo >= 0:
            return e
        if e.hi <= 0:
            return e.scale(-1)
        return Enclosure(Fraction(0), max(-e.lo, e.hi), prec)
    w = prec + 16
    if len(piece.expr) == 1:
        coef, rate = piece.expr[0]
        rs = _rate_signs(piece, w)[0]
        end = sub.hi if rs > 0 else sub.lo
        if end is None:
            raise NonIntegrable(f"|f| unbounded on {sub}")
        if end.as_rational() is not None:
            v = piece.value_at(end.as_rational())
            e = eval_enclosure(v, prec)
            return e if e.lo >= 0 else (e.scale(-1) if e.hi <= 0 else Enclosure(Fraction(0), max(-e.lo, e.hi), prec))
        x = abs(_compile(piece, w).at(eval_ival(end, w)))
        return Enclosure(x.lo(), x.hi(), prec)
    a, b = sub.lo_q, sub.hi_q
    if a is None or b is None:
        raise ValueError("multi-term pieces need bounded rational sub-intervals")
    comp = _compile(piece, w)
    neg = _Compiled([(-c, r) for c, r in comp.terms], w)
    tol = _search_tol(prec)
    top = _max_on(comp, a, b, w, tol)
    bot = _max_on(neg, a, b, w, tol)
    lo = max(top.lo(), bot.lo(), Fraction(0))
    hi = max(top.hi(), bot.hi())
    return Enclosure(lo, hi, prec)


def ess_sup(f: PwExpFun, region: Region | None = None, precision: int = 256) -> Enclosure:
    """Enclosure of the essential supremum of ``|f|`` over ``region``.

    ``region`` defaults to the whole domain.  Null parts of the region
    (points) are ignored; a region of measure zero raises EmptyRegion.
    """
    if region is None:
        region = [interval(0, 1 if f.domain is Domain.UNIT else None)]
    region = [r for r in region if not r.is_degenerate()]
    if not region:
        raise EmptyRegion("region has measure zero")
    best: Enclosure | None = None
    for p in f.pieces:
        for r in region:
            sub = p.interval.intersect(r)
            if sub is None:
                continue
            e = _abs_sup_piece(p, sub, precision)
            best = e if best is None else Enclosure(max(best.lo, e.lo), max(best.hi, e.hi), precision)
    return best if best is not None else Enclosure.exact(0, precision)


# ---------------------------------------------------------------------------
# the metric rho(f, g) = integral_0^1 |f - g| / (1 + |f - g|)


_TAYLOR_MAX = 48


def _taylor_integral(comp: _Compiled, s: int, u: Fraction, v: Fraction, prec: int, tol: Fraction) -> Ival | None:
    """Integral of ``D/(1+D)`` over [u, v] with ``D = s*f >= 0`` there.

    Taylor expansion about the midpoint with an interval remainder bound
    taken over the whole segment.  Returns None when the remainder stays
    above ``tol`` up to the maximal order (caller splits).
    """
    m = (u + v) / 2
    half = (v - u) / 2
    mi, box = _iv_pt(m, prec), _iv_box(u, v, prec)
    sign = Ival.exact(s, prec)

    def coeffs(x: Ival, order: int) -> list[Ival]:
        # Taylor coefficients of U = 1 + D, then of 1/U by the division recurrence
        exps = [(c * sign, r, None if r is None else (r * x).exp()) for c, r in comp.terms]
        U = []
        fact = Fraction(1)
        for k in range(order + 1):
            if k:
                fact *= k
            t = Ival.exact(1 if k == 0 else 0, prec)
            for c, r, ex in exps:
                if r is None:
                    if k == 0:
                        t = t + c
                else:
                    t = t + c * (r ** k) * ex / Ival.exact(fact, prec) if k else t + c * ex
            U.append(t)
        V = [1 / U[0]]
        for k in range(1, order + 1):
            acc = Ival.exact(0, prec)
            for j in range(1, k + 1):
                acc = acc + U[j] * V[k - j]
            V.append(-acc / U[0])
        return V

    Vbox = coeffs(box, _TAYLOR_MAX + 1)
    order = None
    rem = None
    for K in range(2, _TAYLOR_MAX + 1):
        bound = abs(Vbox[K + 1]) * Ival.exact(2 * half ** (K + 2) / (K + 2), prec)
        if bound.hi() <= tol:
            order, rem = K, bound
            break
    if order is None:
        return None
    Vm = coeffs(mi, order)
    total = Ival.exact(2 * half, prec) - Vm[0] * Ival.exact(2 * half, prec)
    for k in range(2, order + 1, 2):
        total = total - Vm[k] * Ival.exact(2 * half ** (k + 1) / (k + 1), prec)
    return total + Ival((-rem).a, rem.b, prec)


def _rho_piece(piece: ExpPiece, prec: int) -> Ival | Fraction:
    w = prec + 16
    iv = piece.interval
    if piece.is_constant():
        c = piece.expr[0][0]
        q = c.as_rational()
        length = iv.length()
        if q is not None and length.as_rational() is not None:
            return abs(q) / (1 + abs(q)) * length.as_rational()
        cv = abs(eval_ival(c, w))
        return cv / (cv + 1) * eval_ival(length, w)
    comp = _compile(piece, w)
    if len(piece.expr) == 1:
        # closed form: integral of |c| e^{rx} / (1 + |c| e^{rx}) = log(1 + |c| e^{rx}) / r
        c, r = comp.terms[0]
        ac = abs(c)
        a = eval_ival(iv.lo, w)
        if iv.hi is None:
            _require_decay(piece, w)
            top = Ival.exact(0, w)
        else:
            b = eval_ival(iv.hi, w)
            top = (Ival.exact(1, w) + ac * (r * b).exp()).log()
        bot = (Ival.exact(1, w) + ac * (r * a).exp()).log()
        return ((top - bot) / r).clamp_nonneg()
    a, b = iv.lo_q, iv.hi_q
    if a is None or b is None:
        raise ValueError("multi-term pieces need bounded rational endpoints")
    tol = _quad_tol(prec)
    total = Ival.exact(0, w)
    stack = [(a, b, 0)]
    while stack:
        u, v, depth = stack.pop()
        val = comp.at(_iv_box(u, v, w))
        s = val.sign()
        share = tol * (v - u) / (b - a) / 2
        if s is not None:
            part = _taylor_integral(comp, s, u, v, w, share)
            if part is not None:
                total = total + part
                continue
        else:
            mag = abs(val)
            upper = mag / (mag + 1) * (v - u)
            if upper.hi() <= share:
                total = total + Ival(Ival.exact(0, w).a, upper.b, w)
                continue
        if depth > 4 * prec:
            raise ArithmeticError("quadrature did not converge")
        m = (u + v) / 2
        stack.extend([(u, m, depth + 1), (m, v, depth + 1)])
    return total.clamp_nonneg()


def rho(f: PwExpFun, g: PwExpFun, precision: int = 256) -> Enclosure:
    """Enclosure of ``integral |f - g| / (1 + |f - g|)`` over the domain.

    On the half line the integral is finite whenever ``f - g`` has a support
    of finite measure or decays exponentially; otherwise NonIntegrable.
    """
    if f.domain is not g.domain:
        raise DomainMismatch(f"{f.domain.value} vs {g.domain.value}")
    d = linear_combine(1, f, -1, g)
    exact = Fraction(0)
    num = None
    for p in d.pieces:
        part = _rho_piece(p, precision)
        if isinstance(part, Fraction):
            exact += part
        else:
            num = part if num is None else num + part
    if num is None:
        return Enclosure.exact(exact, precision)
    return Enclosure(num.lo() + exact, num.hi() + exact, precision)
