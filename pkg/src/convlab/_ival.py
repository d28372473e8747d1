"""Outward-rounded real intervals at an explicit working precision.

Thin wrapper over mpmath's ``libmpi`` routines.  Every operation takes its
precision from the operands, so no global context is touched and values can
be shared freely between threads.
"""

from __future__ import annotations

from fractions import Fraction

from mpmath.libmp import (
    fzero,
    from_int,
    from_rational,
    libmpi,
    mpf_le,
    mpf_lt,
    mpf_neg,
    mpf_sign,
    round_ceiling,
    round_floor,
    to_rational,
    to_str,
)


def _fraction(m) -> Fraction:
    p, q = to_rational(m)
    return Fraction(int(p), int(q))  # mpmath may hand back gmpy2 integers


class Ival:
    __slots__ = ("a", "b", "prec")

    def __init__(self, a, b, prec: int):
        self.a = a
        self.b = b
        self.prec = prec

    # construction -------------------------------------------------------

    @classmethod
    def exact(cls, q, prec: int) -> "Ival":
        """Tightest interval containing the rational ``q``."""
        q = Fraction(q)
        if q.denominator == 1 and q.numerator.bit_length() <= prec:
            m = from_int(q.numerator)
            return cls(m, m, prec)
        lo = from_rational(q.numerator, q.denominator, prec, round_floor)
        hi = from_rational(q.numerator, q.denominator, prec, round_ceiling)
        return cls(lo, hi, prec)

    @classmethod
    def hull_of(cls, lo, hi, prec: int) -> "Ival":
        x, y = cls.exact(lo, prec), cls.exact(hi, prec)
        return cls(x.a, y.b, prec)

    def _new(self, ab, other=None) -> "Ival":
        p = self.prec if other is None else max(self.prec, other.prec)
        return Ival(ab[0], ab[1], p)

    @staticmethod
    def _coerce(x, prec):
        return x if isinstance(x, Ival) else Ival.exact(x, prec)

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other, self.prec)
        p = max(self.prec, other.prec)
        return self._new(libmpi.mpi_add((self.a, self.b), (other.a, other.b), p), other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other, self.prec)
        p = max(self.prec, other.prec)
        return self._new(libmpi.mpi_sub((self.a, self.b), (other.a, other.b), p), other)

    def __rsub__(self, other):
        return self._coerce(other, self.prec) - self

    def __mul__(self, other):
        other = self._coerce(other, self.prec)
        p = max(self.prec, other.prec)
        return self._new(libmpi.mpi_mul((self.a, self.b), (other.a, other.b), p), other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other, self.prec)
        if other.contains_zero():
            raise ZeroDivisionError("interval divisor contains zero")
        p = max(self.prec, other.prec)
        return self._new(libmpi.mpi_div((self.a, self.b), (other.a, other.b), p), other)

    def __rtruediv__(self, other):
        return self._coerce(other, self.prec) / self

    def __neg__(self):
        return Ival(mpf_neg(self.b), mpf_neg(self.a), self.prec)

    def __abs__(self):
        return self._new(libmpi.mpi_abs((self.a, self.b), self.prec))

    def __pow__(self, n: int):
        return self._new(libmpi.mpi_pow_int((self.a, self.b), n, self.prec))

    def exp(self) -> "Ival":
        return self._new(libmpi.mpi_exp((self.a, self.b), self.prec))

    def log(self) -> "Ival":
        if mpf_sign(self.a) <= 0:
            raise ValueError("log of an interval reaching 0")
        return self._new(libmpi.mpi_log((self.a, self.b), self.prec))

    def sqrt(self) -> "Ival":
        return self._new(libmpi.mpi_sqrt((self.a, self.b), self.prec))

    # order and set predicates ------------------------------------------

    def contains_zero(self) -> bool:
        return mpf_sign(self.a) <= 0 <= mpf_sign(self.b)

    def sign(self) -> int | None:
        """+1 or -1 when the whole interval is strictly one-signed, else None."""
        if mpf_sign(self.a) > 0:
            return 1
        if mpf_sign(self.b) < 0:
            return -1
        return None

    def lt(self, other) -> bool:
        """Certified strict ``self < other``."""
        other = self._coerce(other, self.prec)
        return mpf_lt(self.b, other.a)

    def gt(self, other) -> bool:
        other = self._coerce(other, self.prec)
        return mpf_lt(other.b, self.a)

    def le(self, other) -> bool:
        other = self._coerce(other, self.prec)
        return mpf_le(self.b, other.a)

    def hull(self, other: "Ival") -> "Ival":
        a = self.a if mpf_le(self.a, other.a) else other.a
        b = other.b if mpf_le(self.b, other.b) else self.b
        return Ival(a, b, max(self.prec, other.prec))

    def intersect(self, other: "Ival") -> "Ival":
        a = other.a if mpf_le(self.a, other.a) else self.a
        b = self.b if mpf_le(self.b, other.b) else other.b
        if mpf_lt(b, a):
            raise ValueError("disjoint intervals")
        return Ival(a, b, max(self.prec, other.prec))

    def clamp_nonneg(self) -> "Ival":
        """Intersect with [0, +inf); used after operations known to be >= 0."""
        a = self.a if mpf_sign(self.a) >= 0 else fzero
        b = self.b if mpf_sign(self.b) >= 0 else fzero
        return Ival(a, b, self.prec)

    # export -------------------------------------------------------------

    def lo(self) -> Fraction:
        return _fraction(self.a)

    def hi(self) -> Fraction:
        return _fraction(self.b)

    def width(self) -> Fraction:
        return self.hi() - self.lo()

    def mid(self) -> Fraction:
        return (self.lo() + self.hi()) / 2

    def __repr__(self) -> str:
        return f"Ival[{to_str(self.a, 20)}, {to_str(self.b, 20)}]"


def ival_sum(items, prec: int) -> Ival:
    total = Ival.exact(0, prec)
    for x in items:
        total = total + x
    return total
