import cmath

import pytest
from hypothesis import given, strategies as st

from filledjulia.dyadic import ComplexBox, Dyadic, DyadicComplex
from filledjulia.errors import PreconditionError
from filledjulia.oracle import Polynomial, derivative, eval_enclosure, iterate_map_poly, parse_polynomial
from filledjulia.outer import escape_radius
from filledjulia.roots import (
    OrbitKind,
    RootBox,
    Unresolved,
    check_trap_disk,
    classify_periodic,
    enumerate_repelling,
    find_trap_disk,
    isolate_roots,
    periodic_census,
    read_certificates,
    verify_certificate,
    winding_number,
    write_certificates,
)

REGION = ComplexBox.from_bounds(-8, 8, -8, 8)
EPS = Dyadic(1, -10)


def quadratic_roots(a, b, c):
    s = cmath.sqrt(b * b - 4 * a * c)
    return (-b + s) / (2 * a), (-b - s) / (2 * a)


def box_contains(box: ComplexBox, z: complex, slack=1e-12) -> bool:
    return (float(box.re_lo) - slack <= z.real <= float(box.re_hi) + slack
            and float(box.im_lo) - slack <= z.imag <= float(box.im_hi) + slack)


def assert_isolates(boxes, expected, eps=EPS):
    assert sum(b.count for b in boxes) == len(expected)
    for z in expected:
        assert sum(box_contains(b.box, z) for b in boxes) == 1, z
    for b in boxes:
        assert b.box.width <= eps and b.box.height <= eps
    for i, a in enumerate(boxes):
        for c in boxes[i + 1:]:
            assert not a.box.intersects(c.box)


def unit_roots(n):
    return [cmath.exp(2j * cmath.pi * k / n) for k in range(n)]


class TestIsolation:
    def test_quadratic(self):
        boxes = isolate_roots(parse_polynomial("-2,-1,1"), REGION, EPS)
        assert_isolates(boxes, quadratic_roots(1, -1, -2))
        assert [b.count for b in boxes] == [1, 1]

    def test_factored(self):
        assert_isolates(isolate_roots(parse_polynomial("0,-1,1"), REGION, EPS), [0, 1])
        # z^4 - z = z (z - 1)(z^2 + z + 1)
        expected = [0, 1, *quadratic_roots(1, 1, 1)]
        assert_isolates(isolate_roots(parse_polynomial("0,-1,0,0,1"), REGION, EPS), expected)

    def test_double_root_counted_with_multiplicity(self):
        boxes = isolate_roots(parse_polynomial("1,-2,1"), REGION, EPS)
        assert sum(b.count for b in boxes) == 2
        assert all(box_contains(b.box, 1) for b in boxes)

    def test_region_restricts(self):
        region = ComplexBox.from_bounds("1/2", 4, -1, 1)
        boxes = isolate_roots(parse_polynomial("-2,-1,1"), region, EPS)
        assert_isolates(boxes, [2])

    @given(st.lists(st.tuples(st.integers(-12, 12), st.integers(-12, 12)), min_size=2, max_size=4, unique=True))
    def test_random_distinct_roots(self, pts):
        roots = [DyadicComplex(Dyadic(x, -2), Dyadic(y, -2)) for x, y in pts]
        coeffs = [DyadicComplex.of(1)]
        for r in roots:
            # multiply by (z - r)
            nxt = [DyadicComplex.of(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i + 1] = nxt[i + 1] + c
                nxt[i] = nxt[i] - c * r
            coeffs = nxt
        region = ComplexBox.from_bounds("-33/8", "33/8", "-33/8", "33/8")
        boxes = isolate_roots(Polynomial(coeffs), region, EPS)
        assert_isolates(boxes, [complex(r) for r in roots])

    def test_winding_number(self):
        q = parse_polynomial("0,-1,0,0,1")
        assert winding_number(q, ComplexBox.from_bounds("-1/4", "1/4", "-1/4", "1/4")) == 1
        assert winding_number(q, ComplexBox.from_bounds("-3/2", "3/2", "-3/2", "3/2")) == 4
        assert winding_number(q, ComplexBox.from_bounds("-3/2", "-1/4", "1/4", "3/2")) == 1
        assert winding_number(q, ComplexBox.from_bounds(2, 3, 2, 3)) == 0


class TestClassification:
    def root_near(self, p, n, z):
        from filledjulia.oracle import FixedPointEquation
        F = FixedPointEquation.periodic(p, n)
        for b in isolate_roots(F, REGION, EPS):
            if box_contains(b.box, z, 1e-3):
                return b
        raise AssertionError(z)

    def test_superattracting_zero(self):
        p = parse_polynomial("0,0,1")
        cert = classify_periodic(p, 1, self.root_near(p, 1, 0))
        assert cert.kind == OrbitKind.ATTRACTING and cert.derivative_bound < 1
        assert cert.box.contains_point(0)

    def test_repelling_one(self):
        p = parse_polynomial("0,0,1")
        cert = classify_periodic(p, 1, self.root_near(p, 1, 1))
        assert cert.kind == OrbitKind.REPELLING
        # |p'(1)| = 2, so the certified lower bound is just under 2
        assert Dyadic(1) < cert.derivative_bound <= Dyadic(2)
        assert cert.derivative_bound >= Dyadic(2) - cert.radius * cert.second_bound - Dyadic(1, -40)

    def test_chebyshev_fixed_point(self):
        p = parse_polynomial("-2,0,1")
        cert = classify_periodic(p, 1, self.root_near(p, 1, 2))
        assert cert.kind == OrbitKind.REPELLING
        assert Dyadic(3) < cert.derivative_bound <= Dyadic(4)

    def test_multiple_root_box_is_unresolved(self):
        p = parse_polynomial("0,0,1")
        out = classify_periodic(p, 1, RootBox(ComplexBox.from_bounds(-2, 2, -2, 2), 2))
        assert isinstance(out, Unresolved)

    def test_neutral_point_is_unresolved(self):
        # z^2 + z has a parabolic fixed point at 0 (multiplier 1)
        p = parse_polynomial("0,1,1")
        out = classify_periodic(p, 1, self.root_near(p, 1, 0), budget=3)
        assert isinstance(out, Unresolved)


class TestCensus:
    def test_squaring_map_counts(self):
        p = parse_polynomial("0,0,1")
        b = escape_radius(p).b
        recs = periodic_census(p, 3, Dyadic(1, -6), ComplexBox.around(0, b))
        assert [r.total_count for r in recs] == [2, 4, 8]
        assert [r.count(OrbitKind.REPELLING) for r in recs] == [1, 3, 7]
        assert [r.count(OrbitKind.ATTRACTING) for r in recs] == [1, 1, 1]

    def test_enumerate_chebyshev(self):
        certs = enumerate_repelling(parse_polynomial("-2,0,1"), 1, Dyadic(1, -6))
        assert len(certs) == 2
        for z in quadratic_roots(1, -1, -2):
            assert sum(box_contains(c.box, z) for c in certs) == 1
        assert all(c.kind == OrbitKind.REPELLING for c in certs)

    def test_enumerate_squaring_map(self):
        p = parse_polynomial("0,0,1")
        one = enumerate_repelling(p, 1, Dyadic(1, -6))
        assert len(one) == 1 and box_contains(one[0].box, 1)
        two = enumerate_repelling(p, 2, Dyadic(1, -6))
        assert len(two) == 3
        for z in unit_roots(3):
            assert sum(box_contains(c.box, z) for c in two) == 1
        assert [c.period for c in two] == [1, 2, 2]
        # |(p^2)'(z)| = |4 z^3| = 4 on the unit circle
        for c in two:
            if c.period == 2:
                assert Dyadic(3) < c.derivative_bound <= Dyadic(4)

    def test_certificates_reverify(self):
        p = parse_polynomial("0,0,1")
        certs = enumerate_repelling(p, 3, Dyadic(1, -6))
        # distinct points: 1, two of exact period 2, six of exact period 3
        assert [c.period for c in certs] == [1, 2, 2, 3, 3, 3, 3, 3, 3]
        for c in certs:
            assert verify_certificate(p, c)
            dq = derivative(iterate_map_poly(p, c.period))
            assert eval_enclosure(dq, c.box, 60).abs_lower() > 1

    def test_deterministic(self):
        p = parse_polynomial("-2,0,1")
        a = enumerate_repelling(p, 4, Dyadic(1, -6))
        b = enumerate_repelling(p, 4, Dyadic(1, -6))
        assert a == b

    def test_tampered_certificate_fails(self):
        p = parse_polynomial("0,0,1")
        c = enumerate_repelling(p, 1, Dyadic(1, -6))[0]
        moved = type(c)(c.kind, c.period, DyadicComplex(Dyadic(3, -2), Dyadic(0)), c.radius,
                        c.derivative_bound, c.second_bound)
        assert not verify_certificate(p, moved)

    def test_file_roundtrip(self, tmp_path):
        p = parse_polynomial("-2,0,1")
        certs = enumerate_repelling(p, 3, Dyadic(1, -6))
        path = tmp_path / "c.txt"
        write_certificates(path, certs, "poly=-2,0,1")
        header, back = read_certificates(path)
        assert header == "poly=-2,0,1"
        assert back == certs

    def test_workers_do_not_change_the_result(self):
        p = parse_polynomial("-1,0,1")
        assert enumerate_repelling(p, 3, Dyadic(1, -6), workers=3) == enumerate_repelling(p, 3, Dyadic(1, -6))


class TestTrapDisks:
    def attracting_zero(self):
        p = parse_polynomial("0,0,1")
        recs = periodic_census(p, 1, Dyadic(1, -6))
        return p, [c for c in recs[0].certificates if c.kind == OrbitKind.ATTRACTING][0]

    def test_half_disk_for_squaring(self):
        p, cert = self.attracting_zero()
        trap = find_trap_disk(p, cert)
        assert trap.radius == Dyadic(1, -1) and trap.period == 1
        # z^2 maps B(0, 1/2) onto B(0, 1/4)
        assert check_trap_disk(p, 0, Dyadic(1, -1), 1)

    @pytest.mark.parametrize("r", ["1/8", "1/2", "3/4", "15/16"])
    def test_any_radius_below_one(self, r):
        assert check_trap_disk(parse_polynomial("0,0,1"), 0, r, 1)

    def test_unit_disk_is_not_a_trap(self):
        assert not check_trap_disk(parse_polynomial("0,0,1"), 0, 1, 1)

    def test_requires_attracting(self):
        p = parse_polynomial("-2,0,1")
        cert = enumerate_repelling(p, 1, Dyadic(1, -6))[0]
        with pytest.raises(PreconditionError):
            find_trap_disk(p, cert)
