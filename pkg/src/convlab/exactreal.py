"""Exact symbolic scalars built from monomials with symbolic exponents.

A value is a finite sum of monomials ``q * prod(b ** L_b)`` where ``q`` is a
nonzero rational, each base ``b`` is either Euler's number or a prime, and
each exponent ``L_b`` is a rational linear form over a declared basis of
reals (``1, sqrt2, sqrt3, sqrt5, ...`` by default).  The basis is treated as
linearly independent over Q, so two monomials with different factor
signatures never cancel; this is what makes zero tests structural.

Numeric work (enclosures, comparisons) is done with outward-rounded
interval arithmetic and never feeds back into equality decisions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Union

from sympy import factorint, prime

from ._ival import Ival

E = "e"

Rat = Union[int, Fraction]


class UnknownSymbol(KeyError):
    pass


# ---------------------------------------------------------------------------
# symbol basis


@dataclass(frozen=True, eq=False)
class SymbolBasis:
    """Named reals usable as exponent symbols; index 0 is the constant 1.

    ``generators[i](prec)`` returns an :class:`Ival` enclosing symbol ``i``
    with relative width about ``2**-prec``.
    """

    names: tuple[str, ...]
    generators: tuple[Callable[[int], Ival], ...]
    independent: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("symbol names must be unique")
        if len(self.names) != len(self.generators):
            raise ValueError("one generator per symbol")

    def __len__(self) -> int:
        return len(self.names)

    def value(self, index: int, prec: int) -> Ival:
        if not 0 <= index < len(self.names):
            raise UnknownSymbol(index)
        key = (index, prec)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.generators[index](prec)
            self._cache[key] = hit
        return hit

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownSymbol(name) from None


def _sqrt_gen(p: int) -> Callable[[int], Ival]:
    return lambda prec: Ival.exact(p, prec).sqrt()


def sqrt_prime_basis(count: int = 32) -> SymbolBasis:
    """Basis ``1, sqrt(2), sqrt(3), sqrt(5), ...`` with ``count`` roots.

    Square roots of distinct primes together with 1 are linearly
    independent over Q, so the structural convention is justified here.
    """
    primes = [prime(i) for i in range(1, count + 1)]
    names = ("1",) + tuple(f"sqrt{p}" for p in primes)
    gens = (lambda prec: Ival.exact(1, prec),) + tuple(_sqrt_gen(p) for p in primes)
    return SymbolBasis(names, gens)


DEFAULT_BASIS = sqrt_prime_basis()


# ---------------------------------------------------------------------------
# linear forms


@dataclass(frozen=True)
class LinearForm:
    """Rational combination of basis symbols; ``coeffs`` sorted, no zeros."""

    coeffs: tuple[tuple[int, Fraction], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[int, Rat] | Iterable[tuple[int, Rat]]) -> "LinearForm":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        acc: dict[int, Fraction] = {}
        for i, q in items:
            if i < 0:
                raise UnknownSymbol(i)
            acc[i] = acc.get(i, Fraction(0)) + Fraction(q)
        return cls(tuple(sorted((i, q) for i, q in acc.items() if q)))

    @classmethod
    def const(cls, q: Rat) -> "LinearForm":
        return cls(((0, Fraction(q)),)) if q else cls()

    @classmethod
    def symbol(cls, index: int, q: Rat = 1) -> "LinearForm":
        return cls.of({index: q})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        if not other.coeffs:
            return self
        if not self.coeffs:
            return other
        return LinearForm.of(list(self.coeffs) + list(other.coeffs))

    def __neg__(self) -> "LinearForm":
        return LinearForm(tuple((i, -q) for i, q in self.coeffs))

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def __mul__(self, q: Rat) -> "LinearForm":
        q = Fraction(q)
        if not q:
            return LinearForm()
        return LinearForm(tuple((i, c * q) for i, c in self.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, q: Rat) -> "LinearForm":
        return self * (1 / Fraction(q))

    @property
    def constant(self) -> Fraction:
        if self.coeffs and self.coeffs[0][0] == 0:
            return self.coeffs[0][1]
        return Fraction(0)

    def is_constant(self) -> bool:
        return all(i == 0 for i, _ in self.coeffs)

    def ratio(self, other: "LinearForm") -> Fraction | None:
        """``q`` with ``self == q * other`` if one exists (``other`` nonzero)."""
        if not other.coeffs:
            raise ZeroDivisionError("ratio to the zero form")
        if not self.coeffs:
            return Fraction(0)
        if len(self.coeffs) != len(other.coeffs):
            return None
        q = None
        for (i, a), (j, b) in zip(self.coeffs, other.coeffs):
            if i != j:
                return None
            r = a / b
            if q is None:
                q = r
            elif r != q:
                return None
        return q

    def value(self, prec: int, basis: SymbolBasis = DEFAULT_BASIS) -> Ival:
        total = Ival.exact(0, prec)
        for i, q in self.coeffs:
            total = total + basis.value(i, prec) * Ival.exact(q, prec)
        return total

    def to_str(self, basis: SymbolBasis = DEFAULT_BASIS) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, q in self.coeffs:
            name = basis.names[i] if i < len(basis) else f"s{i}"
            if i == 0:
                body = str(abs(q))
            elif abs(q) == 1:
                body = name
            else:
                body = f"{abs(q)}*{name}"
            sign = "-" if q < 0 else "+"
            parts.append((sign, body))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self) -> str:
        return self.to_str()


# ---------------------------------------------------------------------------
# monomials


def _base_key(base) -> tuple[int, int]:
    return (0, 0) if base == E else (1, base)


@lru_cache(maxsize=4096)
def _factor_int(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(factorint(n).items()))


def _canonical(coef: Fraction, powers: dict) -> tuple[Fraction, tuple]:
    """Fold integer parts of prime exponents into the coefficient."""
    out = []
    for base, form in powers.items():
        if not form:
            continue
        if base != E:
            c = form.constant
            whole = math.floor(c)
            if whole:
                coef *= Fraction(base) ** whole
                form = form - LinearForm.const(whole)
                if not form:
                    continue
        out.append((base, form))
    out.sort(key=lambda bf: _base_key(bf[0]))
    return coef, tuple(out)


@dataclass(frozen=True)
class Monomial:
    """``coef * prod(base ** exponent)`` in canonical form."""

    coef: Fraction
    factors: tuple[tuple[object, LinearForm], ...] = ()

    @classmethod
    def make(cls, coef: Rat, factors: Iterable[tuple[object, LinearForm]] = ()) -> "Monomial":
        coef = Fraction(coef)
        if not coef:
            raise ValueError("monomial coefficient must be nonzero")
        powers: dict = {}
        for base, form in factors:
            if base == E:
                powers[E] = powers.get(E, LinearForm()) + form
                continue
            b = Fraction(base)
            if b <= 0:
                raise ValueError(f"base must be positive, got {base}")
            for part, sgn in ((b.numerator, 1), (b.denominator, -1)):
                if part == 1:
                    continue
                for p, k in _factor_int(part):
                    powers[p] = powers.get(p, LinearForm()) + form * (sgn * k)
        coef, canon = _canonical(coef, powers)
        return cls(coef, canon)

    @property
    def signature(self) -> tuple:
        return self.factors

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not other.factors:
            return Monomial(self.coef * other.coef, self.factors)
        if not self.factors:
            return Monomial(self.coef * other.coef, other.factors)
        powers = dict(self.factors)
        for base, form in other.factors:
            powers[base] = powers.get(base, LinearForm()) + form
        coef, canon = _canonical(self.coef * other.coef, powers)
        return Monomial(coef, canon)

    def reciprocal(self) -> "Monomial":
        powers = {b: -f for b, f in self.factors}
        coef, canon = _canonical(1 / self.coef, powers)
        return Monomial(coef, canon)

    def value(self, prec: int, basis: SymbolBasis = DEFAULT_BASIS) -> Ival:
        v = Ival.exact(self.coef, prec)
        for base, form in self.factors:
            expo = form.value(prec, basis)
            if base != E:
                expo = expo * Ival.exact(base, prec).log()
            v = v * expo.exp()
        return v

    def log_value(self, prec: int, basis: SymbolBasis = DEFAULT_BASIS) -> Ival:
        """Enclosure of ``log`` of this monomial (coefficient must be > 0)."""
        if self.coef <= 0:
            raise ValueError("log of a non-positive monomial")
        v = Ival.exact(self.coef, prec).log()
        for base, form in self.factors:
            expo = form.value(prec, basis)
            if base != E:
                expo = expo * Ival.exact(base, prec).log()
            v = v + expo
        return v

    def to_str(self, basis: SymbolBasis = DEFAULT_BASIS) -> str:
        parts = []
        if self.coef != 1 or not self.factors:
            parts.append(str(self.coef))
        for base, form in self.factors:
            parts.append(f"{base}^({form.to_str(basis)})")
        return "*".join(parts)


# ---------------------------------------------------------------------------
# sums


@dataclass(frozen=True)
class MonomialSum:
    """Finite sum of monomials.  The empty sum is exactly zero."""

    terms: tuple[Monomial, ...] = ()

    # constructors -------------------------------------------------------

    @classmethod
    def of(cls, terms: Iterable[Monomial]) -> "MonomialSum":
        return normalize(cls(tuple(terms)))

    @classmethod
    def const(cls, q: Rat) -> "MonomialSum":
        if type(q) is not Fraction:
            q = Fraction(q)
        return cls((Monomial(q),)) if q else cls()

    @classmethod
    def exp(cls, form: LinearForm, coef: Rat = 1) -> "MonomialSum":
        """``coef * e**form``."""
        return cls.of([Monomial.make(coef, [(E, form)])])

    @classmethod
    def power(cls, base: Rat, form: LinearForm, coef: Rat = 1) -> "MonomialSum":
        """``coef * base**form`` for a positive rational base."""
        return cls.of([Monomial.make(coef, [(base, form)])])

    @classmethod
    def coerce(cls, x) -> "MonomialSum":
        if isinstance(x, MonomialSum):
            return x
        if isinstance(x, Monomial):
            return cls((x,))
        if isinstance(x, (int, Fraction)):
            return cls.const(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to MonomialSum")

    # predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def as_rational(self) -> Fraction | None:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and not self.terms[0].factors:
            return self.terms[0].coef
        return None

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    # arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "MonomialSum":
        other = MonomialSum.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        return normalize(MonomialSum(self.terms + other.terms))

    __radd__ = __add__

    def __neg__(self) -> "MonomialSum":
        return MonomialSum(tuple(Monomial(-t.coef, t.factors) for t in self.terms))

    def __sub__(self, other) -> "MonomialSum":
        return self + (-MonomialSum.coerce(other))

    def __rsub__(self, other) -> "MonomialSum":
        return MonomialSum.coerce(other) - self

    def __mul__(self, other) -> "MonomialSum":
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if not q:
                return MonomialSum()
            return MonomialSum(tuple(Monomial(t.coef * q, t.factors) for t in self.terms))
        other = MonomialSum.coerce(other)
        if not self.terms or not other.terms:
            return MonomialSum()
        return normalize(MonomialSum(tuple(a * b for a in self.terms for b in other.terms)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "MonomialSum":
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        other = MonomialSum.coerce(other)
        if len(other.terms) != 1:
            raise ValueError("division only by a single monomial")
        return self * MonomialSum((other.terms[0].reciprocal(),))

    def __pow__(self, m: int) -> "MonomialSum":
        if m < 0:
            return MonomialSum.const(1) / (self ** (-m))
        out = MonomialSum.const(1)
        for _ in range(m):
            out = out * self
        return out

    def to_str(self, basis: SymbolBasis = DEFAULT_BASIS) -> str:
        if not self.terms:
            return "0"
        return " + ".join(t.to_str(basis) for t in self.terms).replace("+ -", "- ")

    def __str__(self) -> str:
        return self.to_str()


def _sig_key(sig: tuple) -> tuple:
    return tuple((_base_key(b), f.coeffs) for b, f in sig)


def normalize(ms: MonomialSum) -> MonomialSum:
    """Merge like signatures, drop zero terms, sort canonically."""
    acc: dict[tuple, Fraction] = {}
    for t in ms.terms:
        acc[t.factors] = acc.get(t.factors, Fraction(0)) + t.coef
    items = [(sig, c) for sig, c in acc.items() if c]
    items.sort(key=lambda sc: _sig_key(sc[0]))
    return MonomialSum(tuple(Monomial(c, sig) for sig, c in items))


# ---------------------------------------------------------------------------
# enclosures


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction
    prec: int = 0

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, q: Rat, prec: int = 0) -> "Enclosure":
        q = Fraction(q)
        return cls(q, q, prec)

    @classmethod
    def from_ival(cls, x: Ival) -> "Enclosure":
        return cls(x.lo(), x.hi(), x.prec)

    def to_ival(self, prec: int | None = None) -> Ival:
        p = prec or self.prec or 64
        return Ival.hull_of(self.lo, self.hi, p)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, q) -> bool:
        if isinstance(q, Enclosure):
            return self.lo <= q.lo and q.hi <= self.hi
        return self.lo <= Fraction(q) <= self.hi

    def overlaps(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def sign(self) -> int | None:
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi, max(self.prec, other.prec))

    def scale(self, q: Rat) -> "Enclosure":
        q = Fraction(q)
        a, b = self.lo * q, self.hi * q
        return Enclosure(min(a, b), max(a, b), self.prec)

    def __str__(self) -> str:
        if self.is_exact():
            return str(self.lo)
        digits = max(6, min(40, int(self.prec * 0.30103) if self.prec else 17))
        return f"[{_dec(self.lo, digits)}, {_dec(self.hi, digits)}]"


def _dec(q: Fraction, digits: int) -> str:
    from mpmath.libmp import from_rational, round_nearest, to_str

    return to_str(from_rational(q.numerator, q.denominator, digits * 4, round_nearest), digits)


def eval_ival(ms: MonomialSum, prec: int, basis: SymbolBasis = DEFAULT_BASIS) -> Ival:
    total = Ival.exact(0, prec)
    for t in ms.terms:
        total = total + t.value(prec, basis)
    return total


def eval_enclosure(ms, precision: int = 256, basis: SymbolBasis = DEFAULT_BASIS) -> Enclosure:
    """Certified enclosure of ``ms``; exact (zero width) for rationals."""
    if precision < 32:
        raise ValueError("precision must be at least 32 bits")
    ms = MonomialSum.coerce(ms)
    q = ms.as_rational()
    if q is not None:
        return Enclosure(q, q, precision)
    x = eval_ival(ms, precision + 16, basis)
    return Enclosure(x.lo(), x.hi(), precision)


def log_enclosure(ms, precision: int = 256, basis: SymbolBasis = DEFAULT_BASIS) -> Enclosure:
    """Enclosure of ``log(ms)`` for a single positive monomial.

    Works in the log domain, so values like ``e**10000`` never need to be
    formed explicitly.
    """
    ms = MonomialSum.coerce(ms)
    if not ms.is_monomial():
        x = eval_ival(ms, precision + 16, basis).log()
    else:
        x = ms.terms[0].log_value(precision + 16, basis)
    return Enclosure(x.lo(), x.hi(), precision)


def symbolic_log(ms) -> LinearForm | None:
    """The form ``L`` when ``ms`` is exactly ``e**L`` (``1`` gives ``0``)."""
    ms = MonomialSum.coerce(ms)
    if len(ms.terms) != 1:
        return None
    t = ms.terms[0]
    if t.coef != 1:
        return None
    if not t.factors:
        return LinearForm()
    if len(t.factors) == 1 and t.factors[0][0] == E:
        return t.factors[0][1]
    return None


# ---------------------------------------------------------------------------
# zero tests and comparison


class ZeroStatus(enum.Enum):
    CERTIFIED_NONZERO = "certified-nonzero"
    CERTIFIED_ZERO = "certified-zero"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ZeroTest:
    status: ZeroStatus
    reason: str
    enclosure: Enclosure | None = None


class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"
    INDETERMINATE = "indeterminate"


def _ladder(budget: int, start: int = 64):
    p = start
    while p <= budget:
        yield p
        p *= 2


def certify_nonzero(ms, basis: SymbolBasis = DEFAULT_BASIS, budget: int = 1024) -> ZeroTest:
    """Structural zero test with a numeric cross-check.

    Zero is only ever declared for the empty canonical sum.  A nonempty
    canonical sum has pairwise distinct signatures, which over an
    independent basis cannot cancel.  The enclosure is reported alongside
    and must exclude 0 for a numeric-only (non-independent) basis.
    """
    ms = normalize(MonomialSum.coerce(ms))
    if not ms.terms:
        return ZeroTest(ZeroStatus.CERTIFIED_ZERO, "empty canonical sum")
    enc = None
    for p in _ladder(budget):
        enc = eval_enclosure(ms, p, basis)
        if enc.excludes_zero():
            break
    numeric = enc is not None and enc.excludes_zero()
    if basis.independent:
        reason = f"{len(ms.terms)} distinct signature(s) over an independent basis"
        reason += (
            f"; enclosure excludes 0 at {enc.prec} bits"
            if numeric
            else "; numeric cross-check inconclusive within budget"
        )
        return ZeroTest(ZeroStatus.CERTIFIED_NONZERO, reason, enc)
    if numeric:
        return ZeroTest(ZeroStatus.CERTIFIED_NONZERO, f"enclosure excludes 0 at {enc.prec} bits", enc)
    return ZeroTest(ZeroStatus.INDETERMINATE, "enclosure straddles 0 at budget", enc)


def compare(a, b, budget: int = 1024, basis: SymbolBasis = DEFAULT_BASIS) -> Ordering:
    a, b = MonomialSum.coerce(a), MonomialSum.coerce(b)
    qa, qb = a.as_rational(), b.as_rational()
    if qa is not None and qb is not None:
        return Ordering.EQUAL if qa == qb else (Ordering.LESS if qa < qb else Ordering.GREATER)
    diff = a - b
    if diff.is_zero():
        return Ordering.EQUAL
    for p in _ladder(budget):
        s = eval_ival(diff, p, basis).sign()
        if s is not None:
            return Ordering.GREATER if s > 0 else Ordering.LESS
    return Ordering.INDETERMINATE


def sign_of(ms, budget: int = 1024, basis: SymbolBasis = DEFAULT_BASIS) -> int | None:
    """-1, 0, +1, or None when the ladder cannot decide."""
    o = compare(ms, MonomialSum(), budget, basis)
    return {Ordering.LESS: -1, Ordering.EQUAL: 0, Ordering.GREATER: 1}.get(o)
