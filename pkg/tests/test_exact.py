from fractions import Fraction

import mpmath
from hypothesis import given, strategies as st

from edgestat.exact import (E_LOWER, E_UPPER, IV, Root, as_fraction, ceil_real, falling,
                            floor_real, iv_bounds, iv_of, iv_root, log2_iv)

rationals = st.fractions(min_value=0, max_value=1000, max_denominator=50)


def test_e_enclosure_is_tight_and_correct():
    mp = mpmath.mp.clone()
    mp.prec = 300
    e = mp.e
    assert E_LOWER < E_UPPER
    assert mp.mpf(E_LOWER.numerator) / E_LOWER.denominator < e
    assert mp.mpf(E_UPPER.numerator) / E_UPPER.denominator > e
    assert E_UPPER - E_LOWER < Fraction(1, 10 ** 40)


def test_as_fraction_reads_decimals_exactly():
    assert as_fraction(0.3) == Fraction(3, 10)
    assert as_fraction("1/7") == Fraction(1, 7)


@given(rationals, rationals)
def test_root_order_matches_squares(a, b):
    assert (Root(a) <= Root(b)) == (a <= b)
    assert (Root(a) < b) == (a < b * b)


@given(rationals)
def test_root_floor_ceil(q):
    r = Root(q)
    f, c = r.floor(), r.ceil()
    assert f * f <= q < (f + 1) ** 2
    assert c * c >= q and (c == 0 or (c - 1) ** 2 < q)
    assert floor_real(r) == f and ceil_real(r) == c


def test_ceil_floor_rationals():
    assert ceil_real(Fraction(7, 2)) == 4 and floor_real(Fraction(7, 2)) == 3
    assert ceil_real(Fraction(-7, 2)) == -3 and floor_real(Fraction(-7, 2)) == -4
    assert ceil_real(5) == 5 == floor_real(5)


@given(st.integers(1, 10 ** 6))
def test_log2_enclosure(k):
    lo, hi = iv_bounds(log2_iv(k))
    mp = mpmath.mp.clone()
    mp.prec = 400
    true = mp.log(k) / mp.log(2)
    assert mp.mpf(lo.numerator) / lo.denominator <= true <= mp.mpf(hi.numerator) / hi.denominator
    if k & (k - 1) == 0:
        assert lo == hi == k.bit_length() - 1


@given(st.integers(1, 10 ** 6), st.sampled_from([2, 3, 4, 5]))
def test_iv_root_encloses(x, n):
    lo, hi = iv_bounds(iv_root(IV.mpf(x), n))
    assert lo ** n <= x <= hi ** n


def test_iv_of_root():
    lo, hi = iv_bounds(iv_of(Root(2)))
    assert lo * lo <= 2 <= hi * hi and hi - lo < Fraction(1, 10 ** 50)


def test_falling():
    assert falling(5, 0) == 1 and falling(5, 2) == 20 and falling(3, 4) == 0
