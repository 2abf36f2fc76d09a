import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from filledjulia.cells import contained_in, neighborhood
from filledjulia.dyadic import Dyadic
from filledjulia.errors import PreconditionError
from filledjulia.inner import (
    center_tolerance,
    cover_depth,
    cover_from_certificates,
    disk_radius,
    inner_cover,
    radius_budget,
)
from filledjulia.oracle import parse_polynomial
from filledjulia.roots import OrbitKind


def cell_centers(S):
    h = float(S.side)
    return (S.cells.astype(float) + 0.5) * h


def nearest(certs, z):
    return min(abs(complex(c.center) - z) for c in certs)


class TestExamples:
    def test_chebyshev_period_one(self):
        cov = inner_cover(parse_polynomial("-2,0,1"), 3, 1)
        assert len(cov.certificates) == 2
        # fixed points of z^2 - 2 are the roots of z^2 - z - 2
        for z in (2, -1):
            assert nearest(cov.certificates, z) <= 2.0 ** -6
        for c in cov.certificates:
            assert c.kind == OrbitKind.REPELLING and c.radius <= center_tolerance(3)
        S = cov.cover
        assert S.depth == cover_depth(3)
        pts = cell_centers(S)
        d = np.minimum(np.hypot(pts[:, 0] - 2, pts[:, 1]), np.hypot(pts[:, 0] + 1, pts[:, 1]))
        assert d.max() <= float(disk_radius(3)) + 2.0 ** -6 + math.sqrt(2) * float(S.side)

    def test_squaring_period_two(self):
        cov = inner_cover(parse_polynomial("0,0,1"), 3, 2)
        targets = [1, cmath.exp(2j * cmath.pi / 3), cmath.exp(-2j * cmath.pi / 3)]
        assert len(cov.certificates) == 3
        for z in targets:
            assert nearest(cov.certificates, z) <= 2.0 ** -6
        keys = {tuple(c) for c in cov.cover.cells.tolist()}
        scale = 2 ** cov.cover.depth
        for z in targets:
            assert (math.floor(z.real * scale), math.floor(z.imag * scale)) in keys

    def test_no_repelling_points_gives_empty_cover(self):
        cov = cover_from_certificates([], 3)
        assert len(cov) == 0

    def test_rejects_bad_arguments(self):
        with pytest.raises(PreconditionError):
            inner_cover(parse_polynomial("0,0,1"), 3, 0)
        with pytest.raises(PreconditionError):
            inner_cover(parse_polynomial("0,0,1"), 0, 1)


@pytest.fixture(scope="module")
def covers():
    p = parse_polynomial("-2,0,1")
    return [inner_cover(p, 3, n) for n in range(1, 6)]


class TestChebyshevCover:
    def test_cover_near_segment(self, covers):
        for cov in covers:
            pts = cell_centers(cov.cover)
            h = float(cov.cover.side)
            dx = np.maximum(np.abs(pts[:, 0]) - 2, 0)
            # farthest point of each cell from [-2, 2]
            far = np.hypot(dx + h / 2, np.abs(pts[:, 1]) + h / 2)
            assert far.max() <= 2.0 ** -3 + 1e-12

    def test_cells_near_a_certified_point(self, covers):
        for cov in covers:
            S = cov.cover
            pts = cell_centers(S)
            cs = np.array([[float(c.center.re), float(c.center.im)] for c in cov.certificates])
            d = np.hypot(pts[:, None, 0] - cs[None, :, 0], pts[:, None, 1] - cs[None, :, 1]).min(axis=1)
            assert d.max() <= 2.0 ** -3 + math.sqrt(2) * float(S.side)

    def test_monotone_in_period(self, covers):
        for a, b in zip(covers, covers[1:]):
            diag = Dyadic(3, -a.cover.depth)
            assert contained_in(a.cover, neighborhood(b.cover, diag))
            assert len(b.certificates) >= len(a.certificates)

    def test_segment_eventually_covered(self, covers):
        xs = np.linspace(-2, 2, 4001)
        S = covers[-1].cover
        keys = {tuple(c) for c in S.cells.tolist()}
        scale = 2 ** S.depth
        miss = sum((math.floor(x * scale), 0) not in keys and (math.floor(x * scale), -1) not in keys for x in xs)
        # period 5 leaves gaps, but most of the segment is already covered
        assert miss < len(xs) // 2


def test_radius_budget_sums_to_disk_radius():
    for m in range(1, 31):
        a, b, c = radius_budget(m)
        assert (a, b, c) == (Fraction(1, 2 ** (m + 2)), Fraction(1, 2 ** (m + 3)), Fraction(1, 2 ** (m + 3)))
        assert a + b + c == Fraction(1, 2 ** (m + 1)) == disk_radius(m).to_fraction()
        assert b == center_tolerance(m).to_fraction()


def test_worker_count_does_not_change_cover():
    p = parse_polynomial("-1,0,1")
    a = inner_cover(p, 3, 3, workers=1)
    b = inner_cover(p, 3, 3, workers=2)
    assert a.certificates == b.certificates and a.cover == b.cover
