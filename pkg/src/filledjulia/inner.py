"""The inner cover: small disks around certified repelling periodic points.

Repelling periodic points are dense in the Julia set, so once enough
periods have been searched, disks of radius ``2**-(m+1)`` around them
cover a neighbourhood of the whole Julia set.  Whatever the number of
periods, every covered point is within ``2**-m`` of the Julia set, because
each disk centre is within ``2**-(m+3)`` of a true repelling point.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .cells import CellSet, from_disks
from .dyadic import ComplexBox, Dyadic
from .errors import PreconditionError
from .oracle import PolynomialOracle
from .roots import (
    DEFAULT_CLASSIFY_BUDGET,
    OrbitCertificate,
    OrbitKind,
    PeriodRecord,
    merge_certificates,
    periodic_census,
)

__all__ = [
    "InnerCover",
    "InnerBuilder",
    "inner_cover",
    "cover_from_certificates",
    "radius_budget",
    "disk_radius",
    "center_tolerance",
    "cover_depth",
]


def disk_radius(m: int) -> Dyadic:
    return Dyadic(1, -(m + 1))


def center_tolerance(m: int) -> Dyadic:
    """Largest isolation radius a certificate may have to be used at precision ``m``."""
    return Dyadic(1, -(m + 3))


def cover_depth(m: int) -> int:
    return m + 4


def radius_budget(m: int) -> Tuple[Fraction, Fraction, Fraction]:
    """How the disk radius is spent.

    A point of the Julia set within ``2**-(m+2)`` of a true repelling point
    ``alpha`` is within that plus ``2**-(m+3)`` of the certified centre;
    the remaining ``2**-(m+3)`` is slack.  The three terms add up to the
    disk radius ``2**-(m+1)``.
    """
    return Fraction(1, 2 ** (m + 2)), Fraction(1, 2 ** (m + 3)), Fraction(1, 2 ** (m + 3))


@dataclass
class InnerCover:
    m: int
    certificates: List[OrbitCertificate]
    cover: CellSet
    periods: int = 0
    unresolved: int = 0

    @property
    def empty(self) -> bool:
        return not len(self.cover)


def cover_from_certificates(
    certs: Sequence[OrbitCertificate], m: int, frame: Optional[ComplexBox] = None
) -> CellSet:
    """Grid cells meeting the disks ``B(center, 2**-(m+1))`` of usable repelling certificates."""
    if m < 1:
        raise PreconditionError("m must be >= 1")
    tol = center_tolerance(m)
    r = disk_radius(m)
    disks = [(c.center, r) for c in certs if c.kind == OrbitKind.REPELLING and c.radius <= tol]
    S = from_disks(disks, cover_depth(m))
    if frame is not None and len(S):
        S = S.with_frame(frame.hull(S.bounding_box()))
    elif frame is not None:
        S = CellSet.empty(cover_depth(m), frame)
    return S


def _census_one(args):
    p, n, eps, region, budget, max_depth = args
    return periodic_census(p, n, eps, region, budget=budget, periods=[n], max_depth=max_depth)[0]


class InnerBuilder:
    """Adds one period at a time, keeping each point once (at its smallest period)."""

    def __init__(self, p: PolynomialOracle, m: int, *, region: Optional[ComplexBox] = None,
                 frame: Optional[ComplexBox] = None, budget: int = DEFAULT_CLASSIFY_BUDGET,
                 max_depth: int = 40):
        if m < 1:
            raise PreconditionError("m must be >= 1")
        self.p = p
        self.m = m
        self.region = region
        self.frame = frame
        self.budget = budget
        self.max_depth = max_depth
        self.certificates: List[OrbitCertificate] = []
        self.records: List[PeriodRecord] = []

    @property
    def periods(self) -> int:
        return len(self.records)

    def job(self, n: int):
        return (self.p, n, center_tolerance(self.m), self.region, self.budget, self.max_depth)

    def add_record(self, rec: PeriodRecord) -> None:
        self.records.append(rec)
        rep = [c for c in rec.certificates if c.kind == OrbitKind.REPELLING]
        self.certificates = merge_certificates(self.certificates, rep)

    def add_period(self) -> PeriodRecord:
        rec = _census_one(self.job(self.periods + 1))
        self.add_record(rec)
        return rec

    def cover(self) -> InnerCover:
        unresolved = sum(len(r.unresolved) for r in self.records)
        return InnerCover(self.m, list(self.certificates),
                          cover_from_certificates(self.certificates, self.m, self.frame),
                          self.periods, unresolved)


def inner_cover(p: PolynomialOracle, m: int, max_period: int, *, workers: int = 1,
                region: Optional[ComplexBox] = None, frame: Optional[ComplexBox] = None) -> InnerCover:
    """Cover built from every repelling point of period ``1..max_period``.

    With no repelling certificates the cover is empty (and ``empty`` is true).
    """
    if max_period < 1:
        raise PreconditionError("max_period must be >= 1")
    b = InnerBuilder(p, m, region=region, frame=frame)
    jobs = [b.job(n) for n in range(1, max_period + 1)]
    if workers > 1 and max_period > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            recs = list(ex.map(_census_one, jobs))
    else:
        recs = [_census_one(j) for j in jobs]
    for rec in recs:
        b.add_record(rec)
    return b.cover()
