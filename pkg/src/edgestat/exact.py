"""Exact arithmetic helpers shared by the counting and bound-checking code.

Three pieces live here:

* :class:`Root` -- the nonnegative real ``sqrt(q)`` for a rational ``q``.
  Thresholds such as ``sqrt(k)/2`` or ``eps*sqrt(k)/(4*sqrt(r))`` are all of
  this shape, so comparing them against integers reduces to comparing squares.
* rational enclosures of ``e`` (:data:`E_LOWER`, :data:`E_UPPER`).
* a private mpmath interval context used for outward-rounded evaluation of
  bounds that mix roots, logarithms and exponentials.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import to_rational

Number = Union[int, Fraction]

IV = MPIntervalContext()
IV.prec = 200


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions, decimal strings and floats to an exact Fraction.

    Floats are converted through ``repr`` so that ``0.3`` means 3/10, which is
    what a user typing ``--eps 0.3`` intends.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


class Root:
    """The real number ``sqrt(square)`` with ``square`` a nonnegative rational.

    Supports exact ordering against ints, Fractions and other roots, and
    scaling by nonnegative rationals.
    """

    __slots__ = ("square",)

    def __init__(self, square):
        square = as_fraction(square)
        if square < 0:
            raise ValueError("Root needs a nonnegative square")
        self.square = square

    @classmethod
    def of(cls, x) -> "Root":
        """Wrap a nonnegative rational ``x`` as a Root."""
        x = as_fraction(x)
        if x < 0:
            raise ValueError("Root.of needs a nonnegative value")
        return cls(x * x)

    def __mul__(self, other):
        if isinstance(other, Root):
            return Root(self.square * other.square)
        other = as_fraction(other)
        if other < 0:
            raise ValueError("only nonnegative scaling keeps a Root")
        return Root(self.square * other * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Root):
            return Root(self.square / other.square)
        other = as_fraction(other)
        if other <= 0:
            raise ValueError("only positive divisors keep a Root")
        return Root(self.square / (other * other))

    def _cmp(self, other) -> int:
        if isinstance(other, Root):
            a, b = self.square, other.square
        else:
            other = as_fraction(other)
            if other < 0:
                return 1
            a, b = self.square, other * other
        return (a > b) - (a < b)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(("Root", self.square))

    def __float__(self):
        return math.sqrt(self.square)

    def floor(self) -> int:
        return math.isqrt(self.square.numerator // self.square.denominator)

    def ceil(self) -> int:
        t = self.floor()
        return t if t * t == self.square else t + 1

    def is_rational(self) -> bool:
        p, q = self.square.numerator, self.square.denominator
        return math.isqrt(p) ** 2 == p and math.isqrt(q) ** 2 == q

    def __repr__(self):
        return f"Root({self.square})"


Real = Union[int, Fraction, Root]


def ceil_real(x: Real) -> int:
    if isinstance(x, Root):
        return x.ceil()
    x = as_fraction(x)
    return -((-x.numerator) // x.denominator)


def floor_real(x: Real) -> int:
    if isinstance(x, Root):
        return x.floor()
    x = as_fraction(x)
    return x.numerator // x.denominator


def _e_enclosure(terms: int = 40) -> tuple[Fraction, Fraction]:
    s = Fraction(0)
    f = 1
    for i in range(terms):
        if i:
            f *= i
        s += Fraction(1, f)
    # tail sum_{i >= terms} 1/i! < 2/terms!
    return s, s + Fraction(2, f * terms)


E_LOWER, E_UPPER = _e_enclosure()


def iv_of(x):
    """Interval enclosure of an exact number (int, Fraction, Root or string)."""
    if isinstance(x, Root):
        return IV.sqrt(iv_of(x.square))
    if isinstance(x, Fraction):
        return IV.mpf(x.numerator) / IV.mpf(x.denominator)
    if isinstance(x, int):
        return IV.mpf(x)
    return iv_of(as_fraction(x))


def iv_bounds(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an mpmath interval."""
    lo, hi = x._mpi_
    p, q = to_rational(lo)
    a = Fraction(int(p), int(q))
    p, q = to_rational(hi)
    b = Fraction(int(p), int(q))
    return a, b


def log2_iv(k: int):
    """Certified enclosure of log base 2 of ``k`` (exact for powers of two)."""
    if k > 0 and k & (k - 1) == 0:
        return IV.mpf(k.bit_length() - 1)
    return IV.log(IV.mpf(k)) / IV.log(IV.mpf(2))


def falling(m: int, t: int) -> int:
    """Falling factorial ``m (m-1) ... (m-t+1)``; equals 1 for ``t == 0``."""
    out = 1
    for i in range(t):
        out *= m - i
    return out


def iv_root(x, n: int):
    """Certified enclosure of the positive n-th root of a positive interval."""
    if n == 1:
        return x
    if n == 2:
        return IV.sqrt(x)
    if n == 4:
        return IV.sqrt(IV.sqrt(x))
    return IV.exp(IV.log(x) / n)
