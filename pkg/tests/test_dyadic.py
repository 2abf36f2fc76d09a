from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from filledjulia.dyadic import (
    ComplexBox,
    Dyadic,
    DyadicComplex,
    DyadicOverflowError,
    EXPONENT_LIMIT,
    box_mul,
    box_point_distance,
    dyadic_round,
    parse_dyadic,
    sqrt_lower,
    sqrt_upper,
)
from support import random_box, random_point_in

dyadics = st.builds(Dyadic, st.integers(-(1 << 70), 1 << 70), st.integers(-80, 80))


@st.composite
def boxes(draw, mag_bits=4):
    e = draw(st.integers(-12, 0))
    lim = (1 << mag_bits) << -e
    x0, x1 = sorted(draw(st.lists(st.integers(-lim, lim), min_size=2, max_size=2)))
    y0, y1 = sorted(draw(st.lists(st.integers(-lim, lim), min_size=2, max_size=2)))
    return ComplexBox(Dyadic(x0, e), Dyadic(x1, e), Dyadic(y0, e), Dyadic(y1, e))


@st.composite
def sub_boxes(draw, box):
    def sub(lo, hi):
        a, b = sorted(draw(st.lists(st.fractions(0, 1, max_denominator=64), min_size=2, max_size=2)))
        lo_f, w = lo.to_fraction(), (hi - lo).to_fraction()
        snap = lambda t: Dyadic(math.floor(t * 4096), -12)
        return max(lo, snap(lo_f + a * w)), min(hi, max(lo, snap(lo_f + b * w)))
    rl, rh = sub(box.re_lo, box.re_hi)
    il, ih = sub(box.im_lo, box.im_hi)
    return ComplexBox(rl, max(rl, rh), il, max(il, ih))


class TestDyadic:
    def test_canonical_form(self):
        assert Dyadic(12) == Dyadic(3, 2)
        assert (Dyadic(12).mantissa, Dyadic(12).exponent) == (3, 2)
        assert (Dyadic(0, 7).mantissa, Dyadic(0, 7).exponent) == (0, 0)

    def test_exponent_range_is_enforced(self):
        with pytest.raises(DyadicOverflowError):
            Dyadic(1, EXPONENT_LIMIT + 1)

    def test_rounding_examples(self):
        assert dyadic_round(Dyadic(3), 4) == Dyadic(3)
        r = dyadic_round(Dyadic(1, -10), 4)
        assert r in (Dyadic(0), Dyadic(1, -4))
        assert abs(r - Dyadic(1, -10)) <= Dyadic(1, -4)
        r = dyadic_round(Dyadic(5, -3), 2)
        assert r in (Dyadic(1, -1), Dyadic(3, -2))

    def test_non_dyadic_rejected(self):
        with pytest.raises(ValueError):
            parse_dyadic("1/3")
        assert parse_dyadic("5*2^-3") == Dyadic(5, -3)
        assert parse_dyadic("-0.25") == Dyadic(-1, -2)

    @given(dyadics)
    def test_returned_values_are_canonical(self, x):
        assert x.is_canonical()
        assert (x * x).is_canonical() and (x + x).is_canonical() and (x - x).is_canonical()

    @given(dyadics, dyadics)
    def test_add_sub_is_exact(self, x, y):
        assert (x + y) - y == x
        assert (x + y).to_fraction() == x.to_fraction() + y.to_fraction()
        assert (x * y).to_fraction() == x.to_fraction() * y.to_fraction()

    @given(dyadics, st.integers(1, 60))
    def test_round_error_bound(self, x, prec):
        r = dyadic_round(x, prec)
        assert abs(r.to_fraction() - x.to_fraction()) <= Fraction(1, 2 ** prec)
        assert r.mantissa == 0 or r.exponent >= -prec

    @given(st.fractions(0, 100), st.integers(1, 80))
    def test_sqrt_bounds(self, q, prec):
        lo, hi = sqrt_lower(q, prec).to_fraction(), sqrt_upper(q, prec).to_fraction()
        assert lo * lo <= q <= hi * hi
        assert hi - lo <= Fraction(2, 2 ** prec)


class TestBoxMul:
    def test_examples(self):
        i = ComplexBox.point(DyadicComplex(Dyadic(0), Dyadic(1)))
        assert box_mul(i, i) == ComplexBox.point(-1)
        unit = ComplexBox.from_bounds(0, 1, 0, 1)
        # (x1 x2 - y1 y2) over [0,1]^4 spans [-1, 1]; (x1 y2 + x2 y1) spans [0, 2]
        assert box_mul(unit, unit) == ComplexBox.from_bounds(-1, 1, 0, 2)
        a = ComplexBox.from_bounds("-0.5", "0.75", "1/4", 3)
        assert box_mul(a, ComplexBox.point(1)) == a

    @given(boxes(), boxes(), st.data())
    def test_monotone_under_inclusion(self, a, b, data):
        a2, b2 = data.draw(sub_boxes(a)), data.draw(sub_boxes(b))
        assert box_mul(a, b).contains(box_mul(a2, b2))

    @given(boxes(), boxes())
    def test_hull_of_corner_products(self, a, b):
        # the product box is exactly the hull of corner products, component by component
        c = box_mul(a, b)
        for z in a.corners():
            for w in b.corners():
                assert c.contains_point(z * w)


class TestDistance:
    def test_examples(self):
        unit = ComplexBox.from_bounds(0, 1, 0, 1)
        assert box_point_distance(unit, DyadicComplex(Dyadic(2), Dyadic(0))) == 1
        assert box_point_distance(unit, DyadicComplex(Dyadic(1, -1), Dyadic(1, -2))) == 0
        d = box_point_distance(unit, DyadicComplex(Dyadic(2), Dyadic(2)))
        assert math.sqrt(2) <= float(d) <= 1.4142136

    @given(boxes(), boxes(), st.integers(8, 64))
    def test_distance_is_an_upper_bound(self, a, b, prec):
        z = b.midpoint()
        d = box_point_distance(a, z, prec).to_fraction()
        px = min(max(z.re, a.re_lo), a.re_hi)
        py = min(max(z.im, a.im_lo), a.im_hi)
        dx, dy = z.re - px, z.im - py
        exact2 = (dx * dx + dy * dy).to_fraction()
        assert d * d >= exact2
        assert d <= Fraction(math.isqrt(int(exact2 * 4 ** prec)) + 2, 2 ** prec)
        assert (d == 0) == a.contains_point(z)


def test_box_mul_soundness_sweep():
    rng = np.random.default_rng(20240501)
    violations = 0
    for _ in range(20_000):
        a, b = random_box(rng), random_box(rng)
        c = box_mul(a, b)
        z, w = random_point_in(rng, a), random_point_in(rng, b)
        violations += not c.contains_point(z * w)
    assert violations == 0
