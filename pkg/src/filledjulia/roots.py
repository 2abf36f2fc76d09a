"""Certified isolation of periodic points and their repelling/attracting certificates.

Roots of ``p^n(z) - z`` are isolated by quadtree subdivision of a search
region.  A box is discarded when interval arithmetic proves it root-free
(escape of the orbit, or ``0`` outside the value enclosure); a root is
accepted when the Krawczyk operator maps a box strictly into itself, which
proves the box holds exactly one root.  Floating-point Newton steps only
propose where to look; nothing they return is trusted.

The total number of roots in the region is known in advance (the degree,
when the region contains a root bound; a certified winding number
otherwise), so the search stops as soon as every root is accounted for.
Boxes that can be neither excluded nor certified at the resolution limit
are grouped and their roots counted by the argument principle, which is
how multiple roots show up.

Classification follows the mean-value argument: with ``Q = p^n``, an
approximation ``r`` within ``rho`` of the periodic point and ``M`` a bound
on ``|Q''|`` near it, ``|Q'(r)| > 1 + rho*M`` proves the point repelling
(and ``|Q'(r)| + rho*M < 1`` proves it attracting).
"""

from __future__ import annotations

import cmath
import enum
import math
import os
import tempfile
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .dyadic import (
    ComplexBox,
    Dyadic,
    DyadicComplex,
    FixedBox,
    fx_add,
    fx_from_complex,
    fx_intersect,
    fx_mag2,
    fx_mig2,
    fx_mul,
    fx_sub,
    fx_to_complex,
    fx_width,
    parse_dyadic,
    sqrt_lower,
    sqrt_upper,
)
from .errors import BoundaryAmbiguityError, PreconditionError, ResourceError
from .oracle import (
    FixedPointEquation,
    PolynomialOracle,
    derivative,
    eval_enclosure,
    iterate_map_poly,
)

__all__ = [
    "OrbitKind",
    "RootBox",
    "OrbitCertificate",
    "Unresolved",
    "TrapDisk",
    "PeriodRecord",
    "isolate_roots",
    "winding_number",
    "classify_periodic",
    "periodic_census",
    "enumerate_repelling",
    "find_trap_disk",
    "check_trap_disk",
    "verify_certificate",
    "write_certificates",
    "read_certificates",
    "DEFAULT_CLASSIFY_BUDGET",
]

DEFAULT_CLASSIFY_BUDGET = 8


class OrbitKind(str, enum.Enum):
    REPELLING = "REPELLING"
    ATTRACTING = "ATTRACTING"


@dataclass(frozen=True)
class RootBox:
    """A box holding ``count`` roots (with multiplicity)."""

    box: ComplexBox
    count: int


@dataclass(frozen=True)
class OrbitCertificate:
    """Finitely checkable proof that a periodic point is repelling or attracting.

    The periodic point ``alpha`` of period ``period`` satisfies
    ``|center - alpha| <= radius``; ``second_bound`` bounds ``|(p^n)''|`` on
    the square of half-side ``radius`` around ``center``, and
    ``derivative_bound`` is the resulting lower (repelling) or upper
    (attracting) bound on the multiplier modulus.
    """

    kind: OrbitKind
    period: int
    center: DyadicComplex
    radius: Dyadic
    derivative_bound: Dyadic
    second_bound: Dyadic

    @property
    def box(self) -> ComplexBox:
        return ComplexBox.around(self.center, self.radius)

    def sort_key(self):
        return (self.period, self.center.re, self.center.im)


@dataclass(frozen=True)
class Unresolved:
    reason: str
    precision: int


@dataclass(frozen=True)
class TrapDisk:
    center: DyadicComplex
    radius: Dyadic
    period: int


@dataclass
class PeriodRecord:
    """What the search found for one period ``n``."""

    period: int
    roots: List[RootBox]
    certificates: List[OrbitCertificate] = field(default_factory=list)
    unresolved: List[Tuple[RootBox, Unresolved]] = field(default_factory=list)

    @property
    def total_count(self) -> int:
        return sum(r.count for r in self.roots)

    def count(self, kind: OrbitKind) -> int:
        return sum(1 for c in self.certificates if c.kind == kind)


# ---------------------------------------------------------------------------
# Krawczyk / exclusion primitives on fixed boxes
# ---------------------------------------------------------------------------

def _mid(X: FixedBox) -> FixedBox:
    cx = (X[0] + X[1]) >> 1
    cy = (X[2] + X[3]) >> 1
    return (cx, cx, cy, cy)


def _interior(K: FixedBox, X: FixedBox) -> bool:
    return X[0] < K[0] and K[1] < X[1] and X[2] < K[2] and K[3] < X[3]


def _inside(K: FixedBox, X: FixedBox) -> bool:
    return X[0] <= K[0] and K[1] <= X[1] and X[2] <= K[2] and K[3] <= X[3]


def _krawczyk(q: PolynomialOracle, X: FixedBox, P: int) -> Optional[FixedBox]:
    """``K(X)``, or ``None`` when no preconditioner is available."""
    c = _mid(X)
    fc = q.jet(c, P, 0)[0]
    dX = q.jet(X, P, 1)[1]
    _, dfloat = q.jet_float(fx_to_complex(c, P))
    if dfloat == 0 or not cmath.isfinite(dfloat):
        return None
    Y = fx_from_complex(1 / dfloat, P)
    if Y == (0, 0, 0, 0):
        return None
    one = (1 << P, 1 << P, 0, 0)
    term = fx_mul(fx_sub(one, fx_mul(Y, dX, P)), fx_sub(X, c), P)
    return fx_add(fx_sub(c, fx_mul(Y, fc, P)), term)


def _excluded(q: PolynomialOracle, X: FixedBox, P: int) -> bool:
    excl = getattr(q, "excludes", None)
    if excl is not None and excl(X, P):
        return True
    v = q.jet(X, P, 0)[0]
    if not (v[0] <= 0 <= v[1] and v[2] <= 0 <= v[3]):
        return True
    # centred form: q(c) + q'(X)(X - c)
    c = _mid(X)
    fc = q.jet(c, P, 0)[0]
    dX = q.jet(X, P, 1)[1]
    v = fx_add(fc, fx_mul(dX, fx_sub(X, c), P))
    return not (v[0] <= 0 <= v[1] and v[2] <= 0 <= v[3])


def _newton(q: PolynomialOracle, z: complex, limit: float, iters: int = 60) -> Optional[Tuple[complex, float]]:
    step = 0.0
    for _ in range(iters):
        try:
            f, d = q.jet_float(z)
        except OverflowError:
            return None
        if d == 0 or not (cmath.isfinite(f) and cmath.isfinite(d)):
            return None
        s = f / d
        z -= s
        step = abs(s)
        if not cmath.isfinite(z) or abs(z) > limit:
            return None
        if step <= 1e-15 * (1 + abs(z)):
            return z, step
    return (z, step) if step <= 1e-9 * (1 + abs(z)) else None


def _refine(q: PolynomialOracle, E: FixedBox, P: int, width: int, steps: int = 60) -> FixedBox:
    """Shrink an enclosure of a root with repeated ``E := K(E) & E``."""
    for _ in range(steps):
        if fx_width(E) <= width:
            break
        K = _krawczyk(q, E, P)
        if K is None:
            break
        N = fx_intersect(K, E)
        if N is None or fx_width(N) >= fx_width(E):
            break
        E = N
    return E


@dataclass
class _Found:
    enclosure: FixedBox          # contains the root
    unique: Optional[FixedBox]   # holds exactly one root (None for clusters)
    count: int


class _Index:
    """Bucket grid so membership queries do not scan every accepted root."""

    def __init__(self, origin: Tuple[int, int], cell: int):
        self.ox, self.oy = origin
        self.cell = max(1, cell)
        self.buckets: Dict[Tuple[int, int], List[int]] = {}
        self.items: List[_Found] = []
        self.big: List[int] = []

    def _range(self, B: FixedBox):
        c = self.cell
        return ((B[0] - self.ox) // c, (B[1] - self.ox) // c, (B[2] - self.oy) // c, (B[3] - self.oy) // c)

    def add(self, f: _Found):
        idx = len(self.items)
        self.items.append(f)
        B = f.unique if f.unique is not None else f.enclosure
        i0, i1, j0, j1 = self._range(B)
        if (i1 - i0 + 1) * (j1 - j0 + 1) > 64:
            self.big.append(idx)
            return
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                self.buckets.setdefault((i, j), []).append(idx)

    def near(self, B: FixedBox) -> Iterable[_Found]:
        i0, i1, j0, j1 = self._range(B)
        seen = set(self.big)
        for k in self.big:
            yield self.items[k]
        if (i1 - i0 + 1) * (j1 - j0 + 1) > 256:
            for k, f in enumerate(self.items):
                if k not in seen:
                    yield f
            return
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                for k in self.buckets.get((i, j), ()):
                    if k not in seen:
                        seen.add(k)
                        yield self.items[k]


def _working_precision(q: PolynomialOracle, eps: Dyadic) -> int:
    eps_bits = max(0, -(eps.exponent + eps.mantissa.bit_length() - 1))
    return max(64, eps_bits + 48) + 2 * q.degree.bit_length()


def _verify_at(q: PolynomialOracle, z: complex, scale: float, X: FixedBox, P: int, eps_fx: int):
    """Krawczyk-verify a root near ``z``; returns (enclosure, unique box) or None."""
    one = 1 << P
    r0 = max(int(scale * one), 4)
    c = fx_from_complex(z, P)
    B = (c[0] - r0, c[1] + r0, c[2] - r0, c[3] + r0)
    K = _krawczyk(q, B, P)
    if K is None or not _interior(K, B):
        return None
    enclosure = fx_intersect(K, B)
    unique = B
    # grow the uniqueness region while Krawczyk keeps succeeding
    limit = max(fx_width(X), r0) * 2
    r = r0
    while 4 * r <= limit:
        r *= 4
        B2 = (c[0] - r, c[1] + r, c[2] - r, c[3] + r)
        K2 = _krawczyk(q, B2, P)
        if K2 is None or not _interior(K2, B2):
            break
        unique = B2
    enclosure = _refine(q, enclosure, P, eps_fx)
    return enclosure, unique


def _isolate(
    q: PolynomialOracle,
    region: ComplexBox,
    eps: Dyadic,
    *,
    max_depth: int = 40,
    known_total: Optional[int] = None,
    P: Optional[int] = None,
) -> Tuple[List[_Found], int]:
    if eps.sign() <= 0:
        raise PreconditionError("eps must be positive")
    if P is None:
        P = _working_precision(q, eps)
    R = region.to_fixed(P)
    if known_total is None:
        rr = q.root_radius()
        if region.contains(ComplexBox.around(DyadicComplex(Dyadic(0)), rr)):
            total = q.degree
        else:
            total = winding_number(q, region, P=P)
    else:
        total = known_total
    if total == 0:
        return [], P

    eps_fx = max(1, eps.floor_scaled(P) // 2)  # enclosure width target; diameter <= eps
    size0 = fx_width(R)
    # roots may sit closer together than eps, so only the depth budget stops subdivision
    min_size = max(size0 >> max_depth, 1)
    limit = 4.0 * max(abs(fx_to_complex(R, P)), float(q.root_radius())) + 4.0
    index = _Index((R[0], R[2]), max(eps_fx * 8, size0 >> 9))
    found: List[_Found] = []
    accounted = 0
    terminal: List[FixedBox] = []
    queue = deque([R])

    def in_unique(X: FixedBox) -> bool:
        for f in index.near(X):
            if f.unique is not None and _inside(X, f.unique):
                return True
        return False

    def accept(E: FixedBox, U: FixedBox) -> bool:
        for f in index.near(U):
            if f.unique is None:
                continue
            if _inside(E, f.unique) or _inside(f.enclosure, U):
                return False
            if fx_intersect(E, f.enclosure) is not None:
                raise BoundaryAmbiguityError("two root enclosures overlap without a common uniqueness box")
        f = _Found(E, U, 1)
        found.append(f)
        index.add(f)
        return True

    while queue and accounted < total:
        X = queue.popleft()
        if in_unique(X) or _excluded(q, X, P):
            continue
        zc = fx_to_complex(X, P)
        seed = _newton(q, zc, limit)
        if seed is not None:
            z, step = seed
            zf = fx_from_complex(z, P)
            near_box = (X[0] - fx_width(X), X[1] + fx_width(X), X[2] - fx_width(X), X[3] + fx_width(X))
            if _inside(zf, near_box) and not any(
                f.unique is not None and _inside(zf, f.unique) for f in index.near(zf)
            ):
                scale = max(step * 64, 1e-12 * (1 + abs(z)), math.ldexp(1, 8 - P))
                res = _verify_at(q, z, scale, X, P, eps_fx)
                if res is not None and accept(*res):
                    accounted += 1
                    if accounted >= total:
                        break
                    if in_unique(X):
                        continue
        K = _krawczyk(q, X, P)
        if K is not None and _interior(K, X):
            E = _refine(q, fx_intersect(K, X), P, eps_fx)
            if accept(E, X):
                accounted += 1
            continue
        if fx_width(X) <= min_size:
            terminal.append(X)
            continue
        cx = (X[0] + X[1]) >> 1
        cy = (X[2] + X[3]) >> 1
        queue.extend(((X[0], cx, X[2], cy), (X[0], cx, cy, X[3]), (cx, X[1], X[2], cy), (cx, X[1], cy, X[3])))

    if accounted < total:
        found = _resolve_clusters(q, terminal, found, total - accounted, P, eps_fx)
    return found, P


def _components(boxes: List[FixedBox]) -> List[List[FixedBox]]:
    n = len(boxes)
    parent = list(range(n))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if fx_intersect(boxes[i], boxes[j]) is not None:
                parent[root(i)] = root(j)
    groups: Dict[int, List[FixedBox]] = {}
    for i in range(n):
        groups.setdefault(root(i), []).append(boxes[i])
    return [groups[k] for k in sorted(groups)]


def _resolve_clusters(q, terminal, found, missing, P, eps_fx) -> List[_Found]:
    out = list(found)
    for comp in _components(terminal):
        H = comp[0]
        for B in comp[1:]:
            H = (min(H[0], B[0]), max(H[1], B[1]), min(H[2], B[2]), max(H[3], B[3]))
        for margin_num in (1, 3, 5):
            m = max(1, fx_width(H) * margin_num // 16)
            G = (H[0] - m, H[1] + m, H[2] - m, H[3] + m)
            inside = [f for f in out if f.count and _inside(f.enclosure, G)]
            crossing = [f for f in out if f.count and not _inside(f.enclosure, G)
                        and fx_intersect(f.enclosure, G) is not None]
            if crossing:
                continue
            try:
                w = winding_number(q, ComplexBox.from_fixed(G, P), P=P)
            except BoundaryAmbiguityError:
                continue
            break
        else:
            raise BoundaryAmbiguityError("could not count roots in a cluster of unresolved boxes")
        extra = w - sum(f.count for f in inside)
        if extra < 0:
            raise ResourceError("inconsistent root count in cluster")
        if extra == 0:
            continue
        if 2 * max(G[1] - G[0], G[3] - G[2]) > 4 * eps_fx * 2:
            raise ResourceError("precision exhausted: root cluster wider than eps")
        for f in inside:
            out.remove(f)
        out.append(_Found(G, None, w))
        missing -= extra
    if missing != 0:
        raise ResourceError("root count mismatch after cluster resolution")
    return out


def _to_rootbox(f: _Found, P: int) -> RootBox:
    return RootBox(ComplexBox.from_fixed(f.enclosure, P), f.count)


def _sorted_found(found: List[_Found]) -> List[_Found]:
    return sorted(found, key=lambda f: (f.enclosure[0] + f.enclosure[1], f.enclosure[2] + f.enclosure[3]))


def isolate_roots(
    q: PolynomialOracle,
    region: ComplexBox,
    eps: Union[Dyadic, int, str],
    *,
    max_depth: int = 40,
) -> List[RootBox]:
    """Disjoint boxes of diameter at most ``eps`` covering every root of ``q`` in ``region``.

    Each box carries the number of roots it contains, counted with
    multiplicity; the counts add up to the number of roots in ``region``.
    Raises :class:`BoundaryAmbiguityError` when a root sits on the region's
    boundary and :class:`ResourceError` when ``max_depth`` is too small to
    separate a cluster.
    """
    eps = Dyadic.of(eps)
    found, P = _isolate(q, region, eps, max_depth=max_depth)
    return [_to_rootbox(f, P) for f in _sorted_found(found)]


# ---------------------------------------------------------------------------
# argument principle
# ---------------------------------------------------------------------------

def _branch_arg(z: complex, side: int) -> float:
    if side == 1:   # Re < 0
        return math.atan2(-z.imag, -z.real) + math.pi
    return math.atan2(z.imag, z.real)


def _halfplane(v: FixedBox) -> Optional[int]:
    if v[0] > 0 or v[2] > 0 or v[3] < 0:
        return 0
    if v[1] < 0:
        return 1
    return None


def winding_number(q: PolynomialOracle, box: ComplexBox, *, P: Optional[int] = None, max_splits: int = 48) -> int:
    """Number of roots of ``q`` inside ``box`` (which must have none on its boundary).

    The boundary is cut into segments until each segment's image is
    certified to lie in an open half-plane; the argument then changes by
    less than ``pi`` along it and the total change is summed.
    """
    if P is None:
        P = 96
    B = box.to_fixed(P)
    corners = [(B[0], B[2]), (B[1], B[2]), (B[1], B[3]), (B[0], B[3])]
    total = 0.0

    def value(x, y):
        return q.jet((x, x, y, y), P, 0)[0]

    for k in range(4):
        (x0, y0), (x1, y1) = corners[k], corners[(k + 1) % 4]
        stack = []
        pieces = 8
        for s in reversed(range(pieces)):
            a = (x0 + (x1 - x0) * s // pieces, y0 + (y1 - y0) * s // pieces)
            b = (x0 + (x1 - x0) * (s + 1) // pieces, y0 + (y1 - y0) * (s + 1) // pieces)
            stack.append((a, b, 0))
        while stack:
            a, b, depth = stack.pop()
            seg = (min(a[0], b[0]), max(a[0], b[0]), min(a[1], b[1]), max(a[1], b[1]))
            v = q.jet(seg, P, 0)[0]
            c = _mid(seg)
            vc = fx_add(q.jet(c, P, 0)[0], fx_mul(q.jet(seg, P, 1)[1], fx_sub(seg, c), P))
            v = fx_intersect(v, vc) or vc
            side = _halfplane(v)
            if side is None:
                if depth >= max_splits or (seg[1] - seg[0] + seg[3] - seg[2]) <= 1:
                    raise BoundaryAmbiguityError("a root lies on (or extremely close to) the contour")
                m = ((a[0] + b[0]) >> 1, (a[1] + b[1]) >> 1)
                stack.append((m, b, depth + 1))
                stack.append((a, m, depth + 1))
                continue
            va = fx_intersect(value(*a), v) or value(*a)
            vb = fx_intersect(value(*b), v) or value(*b)
            total += _branch_arg(fx_to_complex(vb, P), side) - _branch_arg(fx_to_complex(va, P), side)
    turns = total / (2 * math.pi)
    n = round(turns)
    if abs(turns - n) > 0.25:
        raise BoundaryAmbiguityError("winding number did not close up")
    return n


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def _classify_fixed(F: FixedPointEquation, X: FixedBox, P: int, budget: int, period: int):
    Q = F.q
    for attempt in range(budget + 1):
        c = _mid(X)
        cx, cy = c[0], c[2]
        dx = max(cx - X[0], X[1] - cx)
        dy = max(cy - X[2], X[3] - cy)
        rho = sqrt_upper(Dyadic(dx * dx + dy * dy, -2 * P), P)
        M = sqrt_upper(Dyadic(fx_mag2(Q.jet(X, P, 2)[2]), -2 * P), P)
        D = Q.jet(c, P, 1)[1]
        lo = sqrt_lower(Dyadic(fx_mig2(D), -2 * P), P)
        hi = sqrt_upper(Dyadic(fx_mag2(D), -2 * P), P)
        slack = rho * M
        center = DyadicComplex(Dyadic(cx, -P), Dyadic(cy, -P))
        if lo - slack > 1:
            return OrbitCertificate(OrbitKind.REPELLING, period, center, rho, (lo - slack).round_down(P), M)
        if hi + slack < 1:
            return OrbitCertificate(OrbitKind.ATTRACTING, period, center, rho, (hi + slack).round_up(P), M)
        if attempt == budget:
            break
        # tighten the box, then double the working precision
        P2 = 2 * P
        X = tuple(v << (P2 - P) for v in X)
        P = P2
        X = _refine(F, X, P, 1, steps=12)
    return Unresolved("budget", P)


def classify_periodic(
    p: PolynomialOracle,
    n: int,
    root: RootBox,
    *,
    budget: int = DEFAULT_CLASSIFY_BUDGET,
    prec: int = 64,
) -> Union[OrbitCertificate, Unresolved]:
    """Certify the root of ``p^n(z) = z`` isolated by ``root`` as repelling or attracting.

    Boxes holding several roots come back as ``Unresolved("multiple")``;
    points whose multiplier has modulus 1 (or too close to 1 for the
    budget of precision doublings) come back as ``Unresolved("budget")``.
    """
    if root.count != 1:
        return Unresolved("multiple", 0)
    F = FixedPointEquation.periodic(p, n)
    b = root.box
    need = max(0, -min(x.exponent for x in (b.re_lo, b.re_hi, b.im_lo, b.im_hi)))
    P = max(prec, need + 16)
    return _classify_fixed(F, b.to_fixed(P), P, budget, n)


def periodic_census(
    p: PolynomialOracle,
    max_period: int,
    eps: Union[Dyadic, str, int],
    region: Optional[ComplexBox] = None,
    *,
    budget: int = DEFAULT_CLASSIFY_BUDGET,
    periods: Optional[Sequence[int]] = None,
    max_depth: int = 40,
) -> List[PeriodRecord]:
    """Isolate and classify the roots of ``p^n(z) = z`` for each period.

    Certificates are not deduplicated across periods here; see
    :func:`enumerate_repelling`.
    """
    from .outer import escape_radius

    eps = Dyadic.of(eps)
    b = escape_radius(p).b
    if region is None:
        region = ComplexBox.around(DyadicComplex(Dyadic(0)), b)
    elif not region.contains(ComplexBox.around(DyadicComplex(Dyadic(0)), b)):
        raise PreconditionError("search region must contain the escape disk")
    records = []
    for n in periods or range(1, max_period + 1):
        F = FixedPointEquation.periodic(p, n)
        found, P = _isolate(F, region, eps, known_total=F.degree, max_depth=max_depth)
        rec = PeriodRecord(n, [])
        for f in _sorted_found(found):
            rb = _to_rootbox(f, P)
            rec.roots.append(rb)
            if f.count != 1:
                rec.unresolved.append((rb, Unresolved("multiple", P)))
                continue
            res = _classify_fixed(F, f.enclosure, P, budget, n)
            if isinstance(res, Unresolved):
                rec.unresolved.append((rb, res))
            else:
                rec.certificates.append(res)
        records.append(rec)
    return records


def _same_point(a: OrbitCertificate, b: OrbitCertificate) -> bool:
    return a.box.intersects(b.box)


def merge_certificates(
    existing: List[OrbitCertificate], new: Iterable[OrbitCertificate]
) -> List[OrbitCertificate]:
    """Add ``new`` certificates, dropping points already present with a smaller period.

    Two certificates describe the same point when their boxes overlap: the
    boxes are far smaller than the distance between distinct periodic
    points at the precisions used, and a point of period ``k`` is a root of
    every ``p^{jk}(z) = z``.
    """
    out = list(existing)
    buckets: Dict[Tuple[int, int], List[OrbitCertificate]] = {}

    def key(c: OrbitCertificate):
        z = complex(c.center)
        return (math.floor(z.real * 64), math.floor(z.imag * 64))

    for c in out:
        buckets.setdefault(key(c), []).append(c)
    for c in sorted(new, key=OrbitCertificate.sort_key):
        kx, ky = key(c)
        dup = False
        for i in (kx - 1, kx, kx + 1):
            for j in (ky - 1, ky, ky + 1):
                for o in buckets.get((i, j), ()):
                    if _same_point(o, c):
                        dup = True
        if not dup:
            out.append(c)
            buckets.setdefault((kx, ky), []).append(c)
    out.sort(key=OrbitCertificate.sort_key)
    return out


def enumerate_repelling(
    p: PolynomialOracle,
    max_period: int,
    eps: Union[Dyadic, str, int],
    region: Optional[ComplexBox] = None,
    *,
    budget: int = DEFAULT_CLASSIFY_BUDGET,
    workers: int = 1,
) -> List[OrbitCertificate]:
    """Repelling certificates for all periodic points of period up to ``max_period``.

    Each point appears once, with the smallest period at which it was
    found; the list is sorted by period and then by centre.  With several
    workers the periods are searched in parallel and merged in period
    order, so the result does not depend on ``workers``.
    """
    jobs = [(p, max_period, eps, region, budget, n) for n in range(1, max_period + 1)]
    if workers > 1 and max_period > 1:
        with ProcessPoolExecutor(max_workers=min(workers, max_period)) as ex:
            records = list(ex.map(_census_period, jobs))
    else:
        records = [_census_period(j) for j in jobs]
    certs: List[OrbitCertificate] = []
    for rec in records:
        certs = merge_certificates(certs, [c for c in rec.certificates if c.kind == OrbitKind.REPELLING])
    return certs


def _census_period(args) -> PeriodRecord:
    p, max_period, eps, region, budget, n = args
    return periodic_census(p, max_period, eps, region, budget=budget, periods=[n])[0]


# ---------------------------------------------------------------------------
# verification and trap disks
# ---------------------------------------------------------------------------

def verify_certificate(p: PolynomialOracle, cert: OrbitCertificate, prec: int = 64) -> bool:
    """Re-check a certificate by a separate route.

    Expands ``p^n`` into coefficients (when the degree allows), evaluates
    ``(p^n)'`` over the whole square of half-side ``radius`` with Horner's
    scheme, and checks the modulus bound there directly; existence of the
    periodic point in the square is re-proved with a Krawczyk test on the
    expanded polynomial.
    """
    n = cert.period
    try:
        Q = iterate_map_poly(p, n, degree_cap=256)
    except ResourceError:
        Q = FixedPointEquation.periodic(p, n).q
    B = cert.box
    P = max(prec, -cert.radius.exponent + 16, 64)
    dQ = derivative(Q)
    D = eval_enclosure(dQ, B, P)
    if cert.kind == OrbitKind.REPELLING:
        ok = D.abs_lower(P) > 1
    else:
        ok = D.abs_upper(P) < 1
    if not ok:
        return False
    F = _ExpandedMinusZ(Q)
    X = B.to_fixed(P)
    K = _krawczyk(F, X, P)
    return K is not None and _inside(K, X)


class _ExpandedMinusZ(PolynomialOracle):
    def __init__(self, Q: PolynomialOracle):
        self.Q = Q
        self.degree = Q.degree

    def coefficient(self, i, prec):
        a = self.Q.coefficient(i, prec)
        return a - 1 if i == 1 else a

    def jet_float(self, z):
        v, d = self.Q.jet_float(z)
        return v - z, d - 1


def _disk_cells(center: DyadicComplex, radius: Dyadic, P: int, depth: int) -> List[FixedBox]:
    cx, cy = center.re.floor_scaled(P), center.im.floor_scaled(P)
    r = radius.ceil_scaled(P)
    n = 1 << depth
    cells = []
    for i in range(n):
        for j in range(n):
            x0 = cx - r + (2 * r * i) // n
            x1 = cx - r + (2 * r * (i + 1) + n - 1) // n
            y0 = cy - r + (2 * r * j) // n
            y1 = cy - r + (2 * r * (j + 1) + n - 1) // n
            cells.append((x0, x1 + 1, y0, y1 + 1))
    return cells


def check_trap_disk(p: PolynomialOracle, center, radius, period: int, *, max_depth: int = 7, prec: int = 64) -> bool:
    """Certify that ``p^period`` maps the closed disk strictly into its interior.

    The disk is covered by adaptively refined squares; each square that
    meets the disk must have its image enclosure strictly inside.
    """
    center = DyadicComplex.of(center)
    radius = Dyadic.of(radius)
    P = max(prec, -radius.exponent + 24)
    cx = center.re.to_scaled_int(P) if center.re.exponent >= -P else center.re.floor_scaled(P)
    cy = center.im.to_scaled_int(P) if center.im.exponent >= -P else center.im.floor_scaled(P)
    r = radius.floor_scaled(P)
    r2 = r * r
    exact_center = center.re.exponent >= -P and center.im.exponent >= -P
    if not exact_center:
        # shrink the target by the rounding of the centre
        r2 = (r - 2) ** 2
    R = radius.ceil_scaled(P)
    stack = [((cx - R, cx + R, cy - R, cy + R), 0)]
    while stack:
        X, depth = stack.pop()
        # squares missing the disk are irrelevant
        dx = max(X[0] - cx, 0, cx - X[1])
        dy = max(X[2] - cy, 0, cy - X[3])
        if dx * dx + dy * dy > R * R:
            continue
        w = X
        for _ in range(period):
            w = p.jet(w, P, 0)[0]
        rel = (w[0] - cx, w[1] - cx, w[2] - cy, w[3] - cy)
        if fx_mag2(rel) < r2:
            continue
        if depth >= max_depth:
            return False
        mx = (X[0] + X[1]) >> 1
        my = (X[2] + X[3]) >> 1
        stack.extend((((X[0], mx, X[2], my), depth + 1), ((X[0], mx, my, X[3]), depth + 1),
                      ((mx, X[1], X[2], my), depth + 1), ((mx, X[1], my, X[3]), depth + 1)))
    return True


def find_trap_disk(
    p: PolynomialOracle,
    cert: OrbitCertificate,
    *,
    radius: Optional[Dyadic] = None,
    max_halvings: int = 30,
) -> TrapDisk:
    """A dyadic disk around an attracting periodic point that ``p^period`` maps into itself.

    Tries radii ``1/2, 1/4, ...`` (or just ``radius``) and returns the first
    that certifies; raises :class:`ResourceError` when none does, which
    happens when the multiplier is too close to 1.
    """
    if cert.kind != OrbitKind.ATTRACTING:
        raise PreconditionError("trap disks exist only around attracting points")
    candidates = [Dyadic.of(radius)] if radius is not None else [Dyadic(1, -j) for j in range(1, max_halvings + 1)]
    for r in candidates:
        if r <= cert.radius:
            continue
        if check_trap_disk(p, cert.center, r, cert.period):
            return TrapDisk(cert.center, r, cert.period)
    raise ResourceError("no trap disk certified within the budget")


# ---------------------------------------------------------------------------
# certificate files
# ---------------------------------------------------------------------------

def format_certificates(certs: Sequence[OrbitCertificate], header: str) -> str:
    lines = [f"# {header}", "# period center_re center_im radius kind derivative_bound second_derivative_bound"]
    for c in certs:
        lines.append(
            f"{c.period} {c.center.re} {c.center.im} {c.radius} {c.kind.value} "
            f"{c.derivative_bound} {c.second_bound}"
        )
    return "\n".join(lines) + "\n"


def write_certificates(path, certs: Sequence[OrbitCertificate], header: str) -> None:
    _atomic_write(path, format_certificates(certs, header).encode())


def read_certificates(path) -> Tuple[str, List[OrbitCertificate]]:
    header = ""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if not header:
                    header = line[1:].strip()
                continue
            f = line.split()
            out.append(OrbitCertificate(
                OrbitKind(f[4]), int(f[0]), DyadicComplex(parse_dyadic(f[1]), parse_dyadic(f[2])),
                parse_dyadic(f[3]), parse_dyadic(f[5]), parse_dyadic(f[6]),
            ))
    return header, out


def _atomic_write(path, data: bytes) -> None:
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
