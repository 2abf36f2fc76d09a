"""Escape radius and certified outer approximations of ``p^{-k}(D)``.

``D`` is the closed disk of radius ``b`` where ``|z| >= b`` forces
``|p(z)| >= 2|z|``.  The square frame ``[-B, B]^2`` (``B`` the smallest
power of two ``>= b``) is subdivided adaptively; every square is
classified from an interval enclosure of its orbit:

* ``OUT``: some iterate of the whole square lies outside ``D``, so no
  point of it belongs to ``p^{-k}(D)``;
* ``IN``: the enclosure of ``p^k`` over the square lies inside ``D``;
* otherwise the square is split, and becomes ``BND`` once its side
  reaches ``tol / 2``.

Points of ``p^{-k}(D)`` can only lie in ``IN`` or ``BND`` squares.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cells import BND, IN, OUT, CellSet
from .dyadic import ComplexBox, Dyadic, FixedBox, fx_add, fx_intersect, fx_mag2, fx_mig2, fx_mul, fx_sub
from .errors import PreconditionError
from .oracle import PolynomialOracle

__all__ = [
    "EscapeRadius",
    "escape_radius",
    "ClassifiedGrid",
    "preimage_approx",
    "complement_preimage_approx",
    "frame_for",
    "advance",
]


@dataclass(frozen=True)
class EscapeRadius:
    """``b`` with the certified growth bound ``|z| >= b  =>  |p(z)| >= 2|z|``.

    ``lead_lower`` and ``tail_upper`` are the certified bounds
    ``|a_d| >= lead_lower`` and ``sum_{i<d} |a_i| <= tail_upper`` the
    inequality was checked with.
    """

    b: Dyadic
    lead_lower: Dyadic
    tail_upper: Dyadic

    def verify(self) -> bool:
        # for |z| >= b >= 1: |p(z)| >= |a_d||z|^d - S|z|^{d-1} >= (|a_d| b - S)|z| >= 2|z|
        return self.b >= 1 and self.lead_lower * self.b >= self.tail_upper + 2


_CACHE: Dict[str, EscapeRadius] = {}


def escape_radius(p: PolynomialOracle, prec: int = 64) -> EscapeRadius:
    """``b = max(1, (2 + sum_{i<d} |a_i|) / |a_d|)`` from certified coefficient bounds.

    The quotient is rounded up to a multiple of ``2**-16``.
    """
    key = f"{p.describe()}|{prec}"
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    lead = p.leading_lower(prec)
    if lead.sign() <= 0:
        raise PreconditionError("leading coefficient is not provably nonzero")
    tail = Dyadic(0)
    for i in range(p.degree):
        tail = tail + p.coefficient_upper(i, prec)
    q = (tail + 2).to_fraction() / lead.to_fraction()
    b = Dyadic(math.ceil(q * 2**16), -16)
    er = EscapeRadius(max(b, Dyadic(1)), lead, tail)
    if not er.verify():
        raise PreconditionError("growth inequality failed to verify")
    _CACHE[key] = er
    return er


def frame_for(er: EscapeRadius) -> Tuple[int, ComplexBox]:
    """``(log2 B, [-B, B]^2)`` with ``B`` the least power of two ``>= b``."""
    beta = 0
    while Dyadic(1, beta) < er.b:
        beta += 1
    B = Dyadic(1, beta)
    return beta, ComplexBox(-B, B, -B, B)


@dataclass
class ClassifiedGrid:
    """Leaves of the adaptive subdivision.

    ``leaves`` rows are ``(level, ix, iy, class)`` where a leaf at level
    ``j`` is a square of side ``2**(beta + 1 - j)`` with integer indices on
    its own grid; ``depth`` is the absolute grid depth of the finest level.
    """

    k: int
    tol: Dyadic
    beta: int
    depth: int
    frame: ComplexBox
    leaves: List[Tuple[int, int, int, str]]
    poly: str = ""
    _cache: Dict[str, CellSet] = field(default_factory=dict, repr=False, compare=False)
    _job: Optional["_Job"] = field(default=None, repr=False, compare=False)

    def _cells(self, cls: Sequence[str]) -> CellSet:
        key = "".join(cls)
        if key not in self._cache:
            parts = []
            for lvl, ix, iy, c in self.leaves:
                if c not in cls:
                    continue
                d = lvl - self.beta - 1   # absolute depth of this leaf
                s = self.depth - d
                n = 1 << s
                a = np.arange(n, dtype=np.int64)
                gx, gy = np.meshgrid(a + (ix << s), a + (iy << s), indexing="ij")
                parts.append(np.stack([gx.ravel(), gy.ravel()], axis=1))
            cells = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
            self._cache[key] = CellSet(self.depth, cells, self.frame)
        return self._cache[key]

    @property
    def inner(self) -> CellSet:
        return self._cells((IN,))

    @property
    def boundary(self) -> CellSet:
        return self._cells((BND,))

    @property
    def union(self) -> CellSet:
        """``IN`` and ``BND`` cells together at the finest depth."""
        return self._cells((IN, BND))

    def classes_for(self, S: CellSet) -> List[str]:
        """``IN``/``BND`` label for each cell of ``S`` (``IN`` for cells not in the boundary layer)."""
        bk = set(self.boundary.keys().tolist())
        return [BND if k in bk else IN for k in S.keys().tolist()]

    def counts(self) -> Dict[str, int]:
        out = {IN: 0, OUT: 0, BND: 0}
        for _, _, _, c in self.leaves:
            out[c] += 1
        return out


# ---------------------------------------------------------------------------
# per-square classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Job:
    p: PolynomialOracle
    k: int
    P: int
    b2: int
    bfx: int
    beta: int
    max_level: int
    traps: Tuple[Tuple[int, int, int, int], ...]   # (cx, cy, r_in^2, r_out^2) at scale P


def _step(p: PolynomialOracle, w: FixedBox, P: int) -> FixedBox:
    """Enclosure of ``p(w)``: natural Horner form intersected with the centred form."""
    v, d = p.jet(w, P, 1)
    if w[0] == w[1] and w[2] == w[3]:
        return v
    c = ((w[0] + w[1]) >> 1, (w[0] + w[1]) >> 1, (w[2] + w[3]) >> 1, (w[2] + w[3]) >> 1)
    centred = fx_add(p.jet(c, P, 0)[0], fx_mul(d, fx_sub(w, c), P))
    return fx_intersect(v, centred) or v


def _classify(job: _Job, X: FixedBox, finest: bool = False) -> str:
    """``IN``, ``OUT`` or ``?`` for one square.

    Squares that can still be split stop as soon as their enclosure gets
    wider than ``b``; squares of the finest size keep iterating, since
    escape often shows up one step later.
    """
    w = X
    b2 = job.b2
    wrap = job.bfx << 40 if finest else job.bfx
    clear = True   # no enclosure so far has met a trap disk
    for j in range(job.k + 1):
        if fx_mig2(w) > b2:
            return OUT
        for cx, cy, r_in2, r_out2 in job.traps:
            rel = (w[0] - cx, w[1] - cx, w[2] - cy, w[3] - cy)
            if fx_mag2(rel) < r_in2:
                return OUT
            if clear and fx_mig2(rel) <= r_out2:
                clear = False
        if j == job.k:
            break
        if max(w[1] - w[0], w[3] - w[2]) > wrap:
            return "?"
        w = _step(job.p, w, job.P) if finest else job.p.jet(w, job.P, 0)[0]
    if clear and fx_mag2(w) <= b2:
        return IN
    return "?"


def _classify_finest(job: _Job, X: FixedBox) -> str:
    """Classify a square of the finest size, proving it through sub-squares if needed."""
    c = _classify(job, X)
    if c != "?":
        return c
    if _center_stays(job, X):
        # the centre itself (numerically) stays in D, so no OUT proof exists;
        # an IN proof of a square this small is not worth the search
        return "?"
    c = _classify(job, X, True)
    if c != "?":
        return c
    found = set()
    stack = [(X, 0)]
    while stack:
        Y, d = stack.pop()
        c = _classify(job, Y, True)
        if c == "?":
            # a sub-square whose centre stays can never be proved OUT
            if d >= _PROOF_LEVELS or _center_stays(job, Y):
                return "?"
            mx = (Y[0] + Y[1]) >> 1
            my = (Y[2] + Y[3]) >> 1
            stack.extend((((Y[0], mx, Y[2], my), d + 1), ((Y[0], mx, my, Y[3]), d + 1),
                          ((mx, Y[1], Y[2], my), d + 1), ((mx, Y[1], my, Y[3]), d + 1)))
            continue
        found.add(c)
        if len(found) > 1:
            return "?"
    return found.pop()


def _center_stays(job: _Job, X: FixedBox) -> bool:
    z = complex(math.ldexp((X[0] + X[1]) / 2, -job.P), math.ldexp((X[2] + X[3]) / 2, -job.P))
    lim = math.ldexp(float(job.bfx), -job.P)
    traps = [(complex(math.ldexp(cx, -job.P), math.ldexp(cy, -job.P)), math.ldexp(math.sqrt(r2), -job.P))
             for cx, cy, r2, _ in job.traps]
    for j in range(job.k + 1):
        if abs(z) > lim or any(abs(z - c) < r for c, r in traps):
            return False
        if j < job.k:
            z = job.p.jet_float(z)[0]
    return True


# cap on the extra subdivision levels used to prove a finest square IN or OUT
_PROOF_LEVELS = 4


def _subtree(job: _Job, level: int, ix: int, iy: int) -> List[Tuple[int, int, int, str]]:
    out = []
    stack = [(level, ix, iy)]
    while stack:
        lvl, i, j = stack.pop()
        side = 1 << (job.P + job.beta + 1 - lvl)   # 2**(beta+1-lvl) at scale P
        X = (i * side, (i + 1) * side, j * side, (j + 1) * side)
        if lvl >= job.max_level:
            c = _classify_finest(job, X)
            out.append((lvl, i, j, BND if c == "?" else c))
            continue
        c = _classify(job, X)
        if c == "?":
            for di, dj in ((1, 1), (1, 0), (0, 1), (0, 0)):
                stack.append((lvl + 1, 2 * i + di, 2 * j + dj))
        else:
            out.append((lvl, i, j, c))
    return out


def _run_block(args):
    job, blocks = args
    res = []
    for lvl, i, j in blocks:
        res.extend(_subtree(job, lvl, i, j))
    return res


def _levels(beta: int, tol: Dyadic) -> int:
    """Finest quadtree level: side ``2**(beta+1-level) <= tol / 2``."""
    t = tol.to_fraction() / 2
    level = 0
    while Fraction(2) ** (beta + 1 - level) > t:
        level += 1
    return level


def _build(p, k, tol, traps, workers, er=None, seed_level=3) -> ClassifiedGrid:
    if k < 0:
        raise PreconditionError("k must be non-negative")
    tol = Dyadic.of(tol)
    if tol.sign() <= 0:
        raise PreconditionError("tol must be positive")
    er = er or escape_radius(p)
    beta, frame = frame_for(er)
    max_level = max(_levels(beta, tol), 1)
    depth = max_level - beta - 1
    P = max(depth, 0) + 32 + 2 * p.degree.bit_length()
    tfx = []
    for t in traps:
        # the fixed-point centre is off by less than 2 units, so shrink the
        # radius for entry tests and grow it for avoidance tests
        cx, cy = t.center.re.floor_scaled(P), t.center.im.floor_scaled(P)
        exact = t.center.re.ceil_scaled(P) == cx and t.center.im.ceil_scaled(P) == cy
        r_in, r_out = t.radius.floor_scaled(P), t.radius.ceil_scaled(P)
        if not exact:
            r_in, r_out = r_in - 2, r_out + 2
        tfx.append((cx, cy, max(r_in, 0) ** 2, r_out * r_out))
    job = _Job(p, k, P, er.b.ceil_scaled(P) ** 2, er.b.ceil_scaled(P), beta, max_level, tuple(tfx))
    # level-1 squares of side B have indices -1, 0 on a grid of side B
    seed = min(seed_level, max_level)
    n = 1 << (seed - 1)
    blocks = [(seed, i, j) for i in range(-n, n) for j in range(-n, n)]
    leaves = _run(job, blocks, workers)
    grid = ClassifiedGrid(k, tol, beta, depth, frame, leaves, p.describe())
    grid._job = job
    return grid


def _run(job: _Job, blocks, workers: int) -> List[Tuple[int, int, int, str]]:
    if workers and workers > 1 and len(blocks) > 1:
        chunks = [blocks[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_block, [(job, c) for c in chunks]))
        leaves = [x for part in parts for x in part]
    else:
        leaves = _run_block((job, blocks))
    leaves.sort()
    return leaves


def advance(grid: ClassifiedGrid, k: int, *, workers: int = 1) -> ClassifiedGrid:
    """The grid for ``k`` iterates, reusing the ``OUT`` leaves of ``grid``.

    Escape certified within ``grid.k`` steps remains certified for more
    steps, so only ``IN`` and ``BND`` leaves are classified again (and
    possibly split).
    """
    job = getattr(grid, "_job", None)
    if job is None:
        raise PreconditionError("grid was not produced by this module")
    if k < grid.k:
        raise PreconditionError("k can only increase")
    job = replace(job, k=k)
    kept = [leaf for leaf in grid.leaves if leaf[3] == OUT]
    redo = [leaf[:3] for leaf in grid.leaves if leaf[3] != OUT]
    leaves = sorted(kept + _run(job, redo, workers))
    out = ClassifiedGrid(k, grid.tol, grid.beta, grid.depth, grid.frame, leaves, grid.poly)
    out._job = job
    return out


def preimage_approx(p: PolynomialOracle, er: Optional[EscapeRadius], k: int, tol, *, workers: int = 1) -> ClassifiedGrid:
    """Classified subdivision approximating ``p^{-k}(D)`` to within ``tol``."""
    return _build(p, k, tol, (), workers, er)


def complement_preimage_approx(p: PolynomialOracle, traps, k: int, tol, *, workers: int = 1,
                               er: Optional[EscapeRadius] = None) -> ClassifiedGrid:
    """Squares whose orbits neither escape nor enter a trap disk within ``k`` steps.

    A square is ``OUT`` once an iterate of its enclosure lies strictly
    inside one of the certified trap disks (its points are then attracted,
    so they are not in the Julia set) or outside the escape disk.  With no
    traps this is :func:`preimage_approx`.
    """
    traps = tuple(traps)
    if not traps:
        return preimage_approx(p, er, k, tol, workers=workers)
    return _build(p, k, tol, traps, workers, er)
