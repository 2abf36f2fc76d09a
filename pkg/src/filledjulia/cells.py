"""Finite unions of dyadic grid squares.

A :class:`CellSet` at depth ``l`` is a set of closed squares
``[ix*h, (ix+1)*h] x [iy*h, (iy+1)*h]`` with ``h = 2**-l``, stored as a
sorted array of unique integer index pairs.  Two cell sets at the same
depth describe the same set exactly when their arrays are equal, so
containment and equality are decided by integer comparisons after
refining to a common depth.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .dyadic import ComplexBox, Dyadic, DyadicComplex, sqrt_upper
from .errors import PreconditionError

__all__ = [
    "CellSet",
    "from_disks",
    "neighborhood",
    "contained_in",
    "hausdorff_upper",
    "format_cell_list",
    "parse_cell_list",
    "bitmap_bytes",
    "IN",
    "BND",
    "OUT",
]

IN, BND, OUT = "IN", "BND", "OUT"
_PIXEL = {OUT: 0, BND: 128, IN: 255}

_OFFSET = 1 << 31


def _keys(idx: np.ndarray) -> np.ndarray:
    return ((idx[:, 0] + _OFFSET) << 32) | (idx[:, 1] + _OFFSET)


def _canonical(idx: np.ndarray) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64).reshape(-1, 2)
    if len(idx) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    order = np.lexsort((idx[:, 1], idx[:, 0]))
    idx = idx[order]
    keep = np.ones(len(idx), dtype=bool)
    keep[1:] = np.any(idx[1:] != idx[:-1], axis=1)
    return np.ascontiguousarray(idx[keep])


class CellSet:
    """Immutable union of grid squares of side ``2**-depth``."""

    __slots__ = ("depth", "cells", "frame")

    def __init__(self, depth: int, cells, frame: Optional[ComplexBox] = None):
        if depth < -62 or depth > 60:
            raise PreconditionError("depth out of supported range")
        c = _canonical(cells)
        c.setflags(write=False)
        object.__setattr__(self, "depth", int(depth))
        object.__setattr__(self, "cells", c)
        if frame is None:
            frame = self.bounding_box()
        elif len(c) and not frame.contains(self.bounding_box()):
            raise PreconditionError("cells extend outside the frame")
        object.__setattr__(self, "frame", frame)

    def __setattr__(self, name, value):
        raise AttributeError("CellSet is immutable")

    @classmethod
    def empty(cls, depth: int, frame: Optional[ComplexBox] = None) -> "CellSet":
        return cls(depth, np.zeros((0, 2), dtype=np.int64), frame)

    # -- basic views ------------------------------------------------------
    def __len__(self) -> int:
        return len(self.cells)

    def __bool__(self) -> bool:
        return len(self.cells) > 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CellSet)
            and self.depth == other.depth
            and np.array_equal(self.cells, other.cells)
        )

    def __hash__(self):
        return hash((self.depth, self.cells.tobytes()))

    def __repr__(self):
        return f"CellSet(depth={self.depth}, n={len(self)})"

    @property
    def side(self) -> Dyadic:
        return Dyadic(1, -self.depth)

    def bounding_box(self) -> ComplexBox:
        if not len(self.cells):
            z = Dyadic(0)
            return ComplexBox(z, z, z, z)
        lo = self.cells.min(axis=0)
        hi = self.cells.max(axis=0) + 1
        d = -self.depth
        return ComplexBox(Dyadic(int(lo[0]), d), Dyadic(int(hi[0]), d), Dyadic(int(lo[1]), d), Dyadic(int(hi[1]), d))

    def keys(self) -> np.ndarray:
        return _keys(self.cells)

    def centers(self) -> np.ndarray:
        """Cell centres as floats (exact for moderate depths)."""
        return (self.cells.astype(np.float64) + 0.5) * math.ldexp(1.0, -self.depth)

    def cell_box(self, i: int) -> ComplexBox:
        ix, iy = (int(v) for v in self.cells[i])
        d = -self.depth
        return ComplexBox(Dyadic(ix, d), Dyadic(ix + 1, d), Dyadic(iy, d), Dyadic(iy + 1, d))

    def with_frame(self, frame: ComplexBox) -> "CellSet":
        return CellSet(self.depth, self.cells, frame)

    # -- set algebra --------------------------------------------------------
    def refine(self, depth: int) -> "CellSet":
        """The same set described with squares of side ``2**-depth`` (``depth >= self.depth``)."""
        if depth < self.depth:
            raise PreconditionError("refine can only go to a finer depth")
        if depth == self.depth:
            return self
        s = depth - self.depth
        n = 1 << s
        sub = np.stack(np.meshgrid(np.arange(n), np.arange(n), indexing="ij"), axis=-1).reshape(-1, 2)
        out = (self.cells[:, None, :] << s) + sub[None, :, :]
        return CellSet(depth, out.reshape(-1, 2), self.frame)

    def union(self, other: "CellSet") -> "CellSet":
        d = max(self.depth, other.depth)
        a, b = self.refine(d), other.refine(d)
        return CellSet(d, np.concatenate([a.cells, b.cells]), self.frame.hull(other.frame))

    def difference(self, other: "CellSet") -> "CellSet":
        """Cells of ``self`` (at the common depth) not belonging to ``other``."""
        d = max(self.depth, other.depth)
        a, b = self.refine(d), other.refine(d)
        keep = ~np.isin(a.keys(), b.keys())
        return CellSet(d, a.cells[keep], self.frame)

    def coarsen(self, depth: int) -> "CellSet":
        """Smallest set of coarser squares covering ``self``."""
        if depth > self.depth:
            raise PreconditionError("coarsen can only go to a coarser depth")
        s = self.depth - depth
        return CellSet(depth, self.cells >> s, self.frame)


def _scaled(x: Dyadic, s: int) -> int:
    v = x.to_fraction() * (1 << s)
    if v.denominator != 1:
        raise PreconditionError("value not representable at the working scale")
    return v.numerator


def from_disks(disks: Iterable[Tuple[DyadicComplex, Dyadic]], depth: int, frame: Optional[ComplexBox] = None) -> CellSet:
    """All cells of side ``2**-depth`` that meet at least one closed disk.

    The union contains every disk and lies within ``sqrt(2) * 2**-depth``
    of their union.  Requires ``2**-depth <= r/4`` for every radius.
    """
    disks = [(DyadicComplex.of(c), Dyadic.of(r)) for c, r in disks]
    if not disks:
        return CellSet.empty(depth, frame)
    h = Dyadic(1, -depth)
    for _, r in disks:
        if r.sign() <= 0:
            raise PreconditionError("disk radii must be positive")
        if h.scale(2) > r:
            raise PreconditionError(f"depth {depth} too coarse for radius {r}")
    s = max([depth] + [-v.exponent for c, r in disks for v in (c.re, c.im, r)])
    H = 1 << (s - depth)
    rows: List[np.ndarray] = []
    for c, r in disks:
        cx, cy, R = _scaled(c.re, s), _scaled(c.im, s), _scaled(r, s)
        iy0 = -((R - cy) // H) - 1   # smallest iy with (iy+1)*H >= cy - R
        iy1 = (cy + R) // H
        for iy in range(iy0, iy1 + 1):
            y0, y1 = iy * H, (iy + 1) * H
            dy = y0 - cy if y0 > cy else (cy - y1 if y1 < cy else 0)
            rem = R * R - dy * dy
            if rem < 0:
                continue
            w = math.isqrt(rem)  # x-distance t allowed iff t <= sqrt(rem) iff t <= isqrt(rem)
            ix0 = -((w - cx) // H) - 1   # smallest ix with (ix+1)*H >= cx - w
            ix1 = (cx + w) // H          # largest ix with ix*H <= cx + w
            xs = np.arange(ix0, ix1 + 1, dtype=np.int64)
            rows.append(np.stack([xs, np.full_like(xs, iy)], axis=1))
    return CellSet(depth, np.concatenate(rows), frame)


def _offsets(r: Dyadic, depth: int) -> np.ndarray:
    """Offsets ``g`` such that the square at ``g`` comes within ``r`` of the square at 0."""
    rq = r.to_fraction() * (1 << depth) if depth >= 0 else r.to_fraction() / (1 << -depth)
    n = math.floor(rq) + 1
    g = np.arange(-n, n + 1, dtype=np.int64)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    ax = np.maximum(np.abs(gx) - 1, 0)
    ay = np.maximum(np.abs(gy) - 1, 0)
    gap2 = ax * ax + ay * ay
    lim = rq * rq
    keep = np.array([Fraction(int(v)) <= lim for v in gap2.ravel()]).reshape(gap2.shape)
    return np.stack([gx[keep], gy[keep]], axis=1)


def neighborhood(S: CellSet, r, frame: Optional[ComplexBox] = None) -> CellSet:
    """Cells within distance ``r`` of ``S``.

    Contains the exact closed ``r``-neighbourhood of ``S`` and lies inside
    its ``(r + sqrt(2) * 2**-depth)``-neighbourhood.
    """
    r = Dyadic.of(r)
    if r.sign() < 0:
        raise PreconditionError("radius must be non-negative")
    if not len(S) or r.sign() == 0:
        return S if frame is None else S.with_frame(frame)
    off = _offsets(r, S.depth)
    out = (S.cells[:, None, :] + off[None, :, :]).reshape(-1, 2)
    res = CellSet(S.depth, out)
    return res if frame is None else res.with_frame(frame.hull(res.bounding_box()))


def contained_in(A: CellSet, B: CellSet) -> bool:
    """Whether the union of ``A`` lies inside the union of ``B``."""
    if not len(A):
        return True
    if not len(B):
        return False
    if A.depth < B.depth:
        A = A.refine(B.depth)
    elif B.depth < A.depth:
        # a fine cell lies in B's union iff its coarse parent is a cell of B
        return bool(np.all(np.isin(_keys(A.cells >> (A.depth - B.depth)), B.keys())))
    return bool(np.all(np.isin(A.keys(), B.keys())))


def _directed2(A: np.ndarray, B: np.ndarray) -> int:
    """``max_a min_b |a - b|^2`` over integer index arrays."""
    tree = cKDTree(B.astype(np.float64))
    _, j = tree.query(A.astype(np.float64), k=1)
    diff = A - B[j]
    d2 = diff[:, 0].astype(object) ** 2 + diff[:, 1].astype(object) ** 2
    return int(max(d2))


def hausdorff_upper(A: CellSet, B: CellSet, prec: int = 32) -> Dyadic:
    """Upper bound on the Hausdorff distance between the unions of ``A`` and ``B``.

    For equal-size squares the farthest point of one from another is at
    the distance between their centres, so the nearest-centre distance
    bounds each one-sided distance; it overshoots by at most half a cell
    diagonal.
    """
    if not len(A) or not len(B):
        raise PreconditionError("Hausdorff distance is undefined for an empty set")
    d = max(A.depth, B.depth)
    A, B = A.refine(d), B.refine(d)
    if A == B:
        return Dyadic(0)
    g2 = max(_directed2(A.cells, B.cells), _directed2(B.cells, A.cells))
    return sqrt_upper(Dyadic(g2, -2 * d), d + prec)


# ---------------------------------------------------------------------------
# text and raster formats
# ---------------------------------------------------------------------------

def _frame_text(f: ComplexBox) -> str:
    return f"{f.re_lo},{f.re_hi},{f.im_lo},{f.im_hi}"


def format_cell_list(S: CellSet, poly: str, classes: Optional[Sequence[str]] = None, extra: str = "") -> str:
    head = f"depth={S.depth} frame={_frame_text(S.frame)} poly={poly}"
    if extra:
        head += " " + extra
    lines = [head]
    if classes is None:
        lines.extend(f"{ix} {iy}" for ix, iy in S.cells.tolist())
    else:
        lines.extend(f"{ix} {iy} {c}" for (ix, iy), c in zip(S.cells.tolist(), classes))
    return "\n".join(lines) + "\n"


def parse_cell_list(text: str) -> Tuple[CellSet, Dict[str, str], List[Optional[str]]]:
    """Inverse of :func:`format_cell_list`: ``(cells, header fields, classes)``."""
    from .dyadic import parse_dyadic

    lines = text.splitlines()
    fields: Dict[str, str] = {}
    for tok in lines[0].split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            fields[k] = v
    depth = int(fields["depth"])
    f = [parse_dyadic(v) for v in fields["frame"].split(",")]
    frame = ComplexBox(*f)
    pairs, classes = [], []
    for line in lines[1:]:
        parts = line.split()
        if not parts:
            continue
        pairs.append((int(parts[0]), int(parts[1])))
        classes.append(parts[2] if len(parts) > 2 else None)
    cells = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    S = CellSet(depth, cells, frame)
    order = np.lexsort((cells[:, 1], cells[:, 0])) if len(cells) else []
    return S, fields, [classes[i] for i in order]


def bitmap_bytes(S: CellSet, classes: Optional[Sequence[str]] = None) -> Tuple[bytes, int, int]:
    """Grayscale raster of ``S`` over its frame: ``(pixels, width, height)``.

    One byte per cell-sized pixel, row-major, first row at the top
    (largest imaginary part).
    """
    fr = S.frame

    def idx(v: Dyadic, up: bool) -> int:
        q = v.to_fraction() * (1 << S.depth) if S.depth >= 0 else v.to_fraction() / (1 << -S.depth)
        return math.ceil(q) if up else math.floor(q)
    x0, x1 = idx(fr.re_lo, False), idx(fr.re_hi, True)
    y0, y1 = idx(fr.im_lo, False), idx(fr.im_hi, True)
    w, h = max(x1 - x0, 0), max(y1 - y0, 0)
    img = np.zeros((h, w), dtype=np.uint8)
    if len(S):
        vals = np.full(len(S), 255, dtype=np.uint8) if classes is None else np.array(
            [_PIXEL[c or IN] for c in classes], dtype=np.uint8)
        cols = S.cells[:, 0] - x0
        rows = (y1 - 1) - S.cells[:, 1]
        img[rows, cols] = vals
    return img.tobytes(), w, h


def bitmap_sidecar(S: CellSet, width: int, height: int) -> str:
    return f"width={width} height={height} depth={S.depth} frame={_frame_text(S.frame)}\n"
