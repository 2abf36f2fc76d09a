"""Main loops: the sandwich render, the known-radius Siegel render, and the golden-mean estimator.

The render alternates two approximations at precision ``m``:

* an inner cover ``B_k`` (disks around certified repelling points of
  period up to ``min(k, max_period)``), which always lies within ``2**-m``
  of the Julia set;
* an outer set ``D_k`` (squares that may lie in ``p^{-k}`` of the escape
  disk), which always contains the filled Julia set.

As soon as ``D_k`` is contained in ``B_k`` the filled Julia set is
squeezed between them and ``B_k`` is returned.  This can only happen when
the filled Julia set has no interior; otherwise the loop runs out of
budget and says so.
"""

from __future__ import annotations

import enum
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cells import (
    BND,
    IN,
    CellSet,
    _directed2,
    bitmap_bytes,
    bitmap_sidecar,
    contained_in,
    format_cell_list,
    neighborhood,
)
from .dyadic import Dyadic, FixedBox, fx_add, fx_mag2, fx_mul, sqrt_lower, sqrt_upper
from .errors import PreconditionError, ResourceError
from .inner import InnerBuilder, _census_one
from .oracle import GOLDEN, Polynomial, PolynomialOracle, RotationCoefficient
from .outer import ClassifiedGrid, advance, escape_radius, frame_for, preimage_approx

__all__ = [
    "Status",
    "Budgets",
    "StepRecord",
    "RenderResult",
    "SiegelParams",
    "GoldenEstimate",
    "render_filled_julia",
    "render_siegel_with_radius",
    "golden_inner_radius_upper",
    "fibonacci_denominators",
    "siegel_polynomial",
    "certify_hypothesis_diagnostics",
    "write_render",
    "atomic_write",
]


class Status(str, enum.Enum):
    CERTIFIED = "Certified"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass(frozen=True)
class Budgets:
    max_k: int = 64
    max_period: int = 12
    max_depth: Optional[int] = None

    def depth_for(self, m: int) -> int:
        return self.max_depth if self.max_depth is not None else m + 16

    def validate(self) -> None:
        if self.max_k < 1 or self.max_period < 1 or (self.max_depth is not None and self.max_depth < 1):
            raise PreconditionError("budgets must be positive")


@dataclass(frozen=True)
class StepRecord:
    """One pass of the loop.

    ``gap`` bounds from above the largest distance from a point of the
    outer set to the inner cover (``None`` while the cover is empty).
    """

    k: int
    periods: int
    outer_cells: int
    inner_cells: int
    gap: Optional[Dyadic]
    contained: bool
    unresolved: int = 0


@dataclass
class RenderResult:
    status: Status
    m: int
    k: int
    periods: int
    poly: str
    budgets: Budgets
    output: Optional[CellSet] = None
    diagnostics: List[StepRecord] = field(default_factory=list)
    cause: Optional[str] = None
    certificates: list = field(default_factory=list)
    outer: Optional[ClassifiedGrid] = None
    conditional_rho: Optional[Dyadic] = None

    @property
    def certified(self) -> bool:
        return self.status == Status.CERTIFIED

    def header_fields(self) -> str:
        rho = "none" if self.conditional_rho is None else str(self.conditional_rho)
        return (
            f"m={self.m} k={self.k} periods={self.periods} max_k={self.budgets.max_k} "
            f"max_period={self.budgets.max_period} max_depth={self.budgets.depth_for(self.m)} "
            f"status={self.status.value} conditional_rho={rho}"
        )


def _gap(D: CellSet, B: CellSet) -> Optional[Dyadic]:
    if not len(D):
        return Dyadic(0)
    if not len(B):
        return None
    if contained_in(D, B):
        return Dyadic(0)
    d = max(D.depth, B.depth)
    D, B = D.refine(d), B.refine(d)
    return sqrt_upper(Dyadic(_directed2(D.cells, B.cells), -2 * d), d + 16)


def render_filled_julia(
    p: PolynomialOracle,
    m: int,
    budgets: Optional[Budgets] = None,
    *,
    workers: int = 1,
    progress: Optional[Callable[[StepRecord], None]] = None,
) -> RenderResult:
    """Certified ``2**-m`` approximation of the filled Julia set, or an honest refusal.

    Step ``k`` adds repelling points of period ``min(k, max_period)`` to
    the inner cover, computes the outer set for ``k`` iterates at
    tolerance ``2**-(m+3)``, and stops as soon as the outer set lies inside
    the cover; the cover is the output.
    """
    if m < 1:
        raise PreconditionError("m must be >= 1")
    budgets = budgets or Budgets()
    budgets.validate()
    er = escape_radius(p)
    _, frame = frame_for(er)
    tol = Dyadic(1, -(m + 3))
    builder = InnerBuilder(p, m, frame=frame, max_depth=budgets.depth_for(m))
    steps: List[StepRecord] = []
    result = RenderResult(Status.BUDGET_EXHAUSTED, m, 0, 0, p.describe(), budgets, diagnostics=steps)
    pool = ProcessPoolExecutor(max_workers=1) if workers > 1 else None
    grid = None
    try:
        for k in range(1, budgets.max_k + 1):
            want = min(k, budgets.max_period)
            pending = None
            if builder.periods < want:
                job = builder.job(builder.periods + 1)
                pending = pool.submit(_census_one, job) if pool else None
                if pending is None:
                    builder.add_record(_census_one(job))
            outer_workers = max(1, workers - 1) if pool else 1
            if grid is None:
                grid = preimage_approx(p, er, k, tol, workers=outer_workers)
            else:
                grid = advance(grid, k, workers=outer_workers)
            if pending is not None:
                builder.add_record(pending.result())
            inner = builder.cover()
            D = grid.union
            B = inner.cover
            ok = len(B) > 0 and contained_in(D, B)
            rec = StepRecord(k, builder.periods, len(D), len(B), _gap(D, B), ok, inner.unresolved)
            steps.append(rec)
            result.k, result.periods = k, builder.periods
            if progress:
                progress(rec)
            if ok:
                result.status = Status.CERTIFIED
                result.output = B
                result.certificates = inner.certificates
                result.outer = grid
                return result
        result.cause = "iteration budget exhausted before the outer set fit inside the inner cover"
    except ResourceError as exc:
        result.cause = f"resource limit: {exc}"
    finally:
        if pool:
            pool.shutdown()
    result.certificates = list(builder.certificates)
    return result


# ---------------------------------------------------------------------------
# Siegel disks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SiegelParams:
    """``P(z) = z^2 + exp(2 pi i theta) z``; ``theta`` is :data:`GOLDEN` or a fraction."""

    theta: Union[str, Fraction] = GOLDEN
    rho: Optional[Dyadic] = None
    n: int = 2

    def __post_init__(self):
        if self.rho is not None and not (Dyadic(0) <= self.rho < 1):
            raise PreconditionError("rho must satisfy 0 <= rho < 1")
        if self.n < 1:
            raise PreconditionError("n must be >= 1")

    @property
    def irrational(self) -> bool:
        return self.theta == GOLDEN


def siegel_polynomial(theta: Union[str, Fraction] = GOLDEN) -> Polynomial:
    return Polynomial([0, RotationCoefficient(theta if theta == GOLDEN else Fraction(theta)), 1])


def _mag_up(w: FixedBox) -> int:
    return math.isqrt(fx_mag2(w)) + 1


def _taylor(coeffs: Sequence[FixedBox], c: FixedBox, P: int) -> List[FixedBox]:
    """Enclosures of the Taylor coefficients of ``p`` at ``c`` (repeated synthetic division)."""
    a = list(coeffs)
    n = len(a)
    for j in range(n):
        for i in range(n - 2, j - 1, -1):
            a[i] = fx_add(a[i], fx_mul(a[i + 1], c, P))
    return a


def _disk_step(coeffs: Sequence[FixedBox], x: int, y: int, r: int, P: int) -> Tuple[int, int, int]:
    """A disk ``(x, y, r)`` at scale ``2**-P`` containing ``p`` of the given disk.

    Uses ``|p(c+h) - p(c)| <= sum_j |T_j| |h|^j`` with ``T_j`` the Taylor
    coefficients at ``c``.  Unlike rectangles, disks do not grow when the
    map rotates, which is the whole story near a Siegel fixed point.
    """
    T = _taylor(coeffs, (x, x, y, y), P)
    V = T[0]
    cx, cy = (V[0] + V[1]) >> 1, (V[2] + V[3]) >> 1
    out = _mag_up((V[0] - cx, V[1] - cx, V[2] - cy, V[3] - cy))
    rp = r
    for t in T[1:]:
        out += -((-_mag_up(t) * rp) >> P)
        rp = -((-rp * r) >> P)
    return cx, cy, out


def _inside_disk_cells(p: PolynomialOracle, grid: ClassifiedGrid, radius: Dyadic, k: int) -> CellSet:
    """Cells of ``grid.union`` whose ``k``-th iterate lies strictly inside ``B(0, radius)``."""
    if radius.sign() <= 0:
        return CellSet.empty(grid.depth, grid.frame)
    P = max(grid.depth, 0) + 40
    lim = radius.floor_scaled(P)
    coeffs = p.fixed_coefficients(P)
    parts = []
    for lvl, ix, iy, c in grid.leaves:
        if c not in (IN, BND):
            continue
        stack = [(lvl, ix, iy)]
        while stack:
            l, i, j = stack.pop()
            side = 1 << (P + grid.beta + 1 - l)
            # the square lies in the disk around its centre of radius side/sqrt(2)
            x, y, r = (2 * i + 1) * side >> 1, (2 * j + 1) * side >> 1, math.isqrt(side * side >> 1) + 1
            for _ in range(k):
                if r >= lim:
                    break
                x, y, r = _disk_step(coeffs, x, y, r, P)
            if math.isqrt(x * x + y * y) + 1 + r < lim:
                s = grid.depth - (l - grid.beta - 1)
                n = 1 << s
                a = np.arange(n, dtype=np.int64)
                gx, gy = np.meshgrid(a + (i << s), a + (j << s), indexing="ij")
                parts.append(np.stack([gx.ravel(), gy.ravel()], axis=1))
            elif l - grid.beta - 1 < grid.depth:
                stack.extend([(l + 1, 2 * i + a, 2 * j + b) for a in (0, 1) for b in (0, 1)])
    cells = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    return CellSet(grid.depth, cells, grid.frame)


def render_siegel_with_radius(sp: SiegelParams, budgets: Optional[Budgets] = None, *,
                              workers: int = 1,
                              progress: Optional[Callable[[StepRecord], None]] = None) -> RenderResult:
    """Filled Julia set of ``z^2 + exp(2 pi i theta) z`` given the Siegel disk's inner radius.

    ``rho`` is trusted: the output is correct if the disk ``B(0, rho)``
    really lies in the Siegel disk, and the result records that condition.
    Step ``k`` computes the outer set ``D_k``, the squares ``B_k`` mapped
    by ``k`` iterates strictly inside ``B(0, rho - 2**-k)``, and succeeds
    when ``D_k`` lies within ``2**-(n+1)`` of ``B_k``; the output is the
    ``2**-(n+1)``-neighbourhood of ``D_k - B_k``.
    """
    if sp.rho is None:
        raise PreconditionError("rho is required")
    budgets = budgets or Budgets()
    budgets.validate()
    n = sp.n
    p = siegel_polynomial(sp.theta)
    steps: List[StepRecord] = []
    result = RenderResult(Status.BUDGET_EXHAUSTED, n, 0, 0, p.describe(), budgets,
                          diagnostics=steps, conditional_rho=sp.rho)
    if not sp.irrational:
        result.cause = "rational rotation number: the fixed point is parabolic and has no Siegel disk"
        return result
    er = escape_radius(p)
    tol = Dyadic(1, -(n + 3))
    margin = Dyadic(1, -(n + 1))
    try:
        grid = None
        for k in range(1, budgets.max_k + 1):
            grid = preimage_approx(p, er, k, tol, workers=workers) if grid is None else advance(grid, k, workers=workers)
            D = grid.union
            B = _inside_disk_cells(p, grid, sp.rho - Dyadic(1, -k), k)
            near = neighborhood(B, margin) if len(B) else B
            ok = len(B) > 0 and contained_in(D, near)
            rec = StepRecord(k, 0, len(D), len(B), _gap(D, B), ok)
            steps.append(rec)
            result.k = k
            if progress:
                progress(rec)
            if ok:
                result.status = Status.CERTIFIED
                result.output = neighborhood(D.difference(B), margin, frame=grid.frame)
                result.outer = grid
                return result
        result.cause = "iteration budget exhausted"
    except ResourceError as exc:
        result.cause = f"resource limit: {exc}"
    return result


def fibonacci_denominators(n: int) -> List[int]:
    """Denominators ``q_1..q_n`` of the convergents of the golden mean: 1, 2, 3, 5, 8, ..."""
    q = [1, 2]
    while len(q) < n:
        q.append(q[-1] + q[-2])
    return q[:n]


@dataclass(frozen=True)
class GoldenEstimate:
    """``upper[j]`` bounds ``min_{i <= q[j]} |P^i(c)|`` from above and ``lower[j]`` from below."""

    q: List[int]
    upper: List[Dyadic]
    lower: List[Dyadic]
    prec: int


MAX_CONVERGENT = 16


def golden_inner_radius_upper(n: int, prec: int = 128, *, max_prec: int = 4096,
                              cap: int = MAX_CONVERGENT) -> GoldenEstimate:
    """Certified bounds on the critical orbit's closest approach to the Siegel fixed point.

    For ``P(z) = z^2 + lambda z`` with the golden rotation ``lambda``, the
    critical point is ``c = -lambda/2``.  For each convergent denominator
    ``q_j`` this returns an upper bound ``s_j`` on ``min_{0 <= i <= q_j} |P^i(c)|``
    (a running minimum, so nonincreasing).  The working precision doubles
    until the orbit enclosures stay narrower than ``2**-(prec/2)``.
    """
    if not 1 <= n <= cap:
        raise PreconditionError(f"n must be between 1 and {cap}")
    q = fibonacci_denominators(n)
    p = siegel_polynomial(GOLDEN)
    P = prec
    while P <= max_prec:
        lam = p.coefficient_box(1, P + 2).to_fixed(P)
        w = (-((lam[1] + 1) >> 1), -(lam[0] >> 1), -((lam[3] + 1) >> 1), -(lam[2] >> 1))
        limit = 1 << (P - P // 2)   # width 2**-(P/2) in units of 2**-P
        best_hi = best_lo = None
        upper, lower = [], []
        ok = True
        j = 0
        for i in range(q[-1] + 1):
            if i:
                w = p.jet(w, P, 0)[0]
            if max(w[1] - w[0], w[3] - w[2]) > limit:
                ok = False
                break
            hi = fx_mag2(w)
            xl = w[0] if w[0] > 0 else (-w[1] if w[1] < 0 else 0)
            yl = w[2] if w[2] > 0 else (-w[3] if w[3] < 0 else 0)
            lo = xl * xl + yl * yl
            best_hi = hi if best_hi is None else min(best_hi, hi)
            best_lo = lo if best_lo is None else min(best_lo, lo)
            while j < n and q[j] == i:
                upper.append(sqrt_upper(Dyadic(best_hi, -2 * P), prec))
                lower.append(sqrt_lower(Dyadic(best_lo, -2 * P), prec))
                j += 1
        if ok:
            return GoldenEstimate(q, upper, lower, P)
        P *= 2
    raise ResourceError("precision escalation cap reached")


# ---------------------------------------------------------------------------
# reporting and files
# ---------------------------------------------------------------------------

def certify_hypothesis_diagnostics(result: RenderResult) -> str:
    """Plain-text account of a render that did not certify."""
    if not result.diagnostics:
        return ""
    lines = [
        f"status={result.status.value} poly={result.poly} m={result.m}",
        f"cause: {result.cause or 'none'}",
        "k periods outer_cells inner_cells gap_upper contained unresolved",
    ]
    for s in result.diagnostics:
        gap = "inf" if s.gap is None else f"{float(s.gap):.6g}"
        lines.append(f"{s.k} {s.periods} {s.outer_cells} {s.inner_cells} {gap} {int(s.contained)} {s.unresolved}")
    gaps = [float(s.gap) for s in result.diagnostics if s.gap is not None]
    if len(gaps) >= 2:
        tail = gaps[-max(2, len(gaps) // 4):]
        if tail[-1] <= 0:
            trend = "gap reached 0"
        elif tail[0] - tail[-1] <= 0.01 * tail[0]:
            trend = (f"gap stable at {tail[-1]:.6g} over the last {len(tail)} steps "
                     f"(bounded away from 0: the filled Julia set appears to have interior)")
        else:
            trend = f"gap shrinking: {gaps[0]:.6g} -> {tail[-1]:.6g}"
        lines.append(f"trend: {trend}")
    elif not gaps:
        lines.append("trend: inner cover stayed empty")
    unresolved = result.diagnostics[-1].unresolved
    if unresolved:
        lines.append(f"unresolved periodic points (neutral or multiple): {unresolved}")
    return "\n".join(lines) + "\n"


def atomic_write(path, data: Union[bytes, str]) -> None:
    """Write ``data`` to ``path`` through a temporary file and a rename."""
    if isinstance(data, str):
        data = data.encode()
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_payloads(result: RenderResult, *, bitmap: bool = False) -> dict:
    """File contents for a certified result: ``{"cells": str, "bitmap": bytes, "sidecar": str}``."""
    if result.output is None:
        raise PreconditionError("no output to write")
    S = result.output
    classes = result.outer.classes_for(S) if result.outer is not None and result.conditional_rho is None else None
    out = {"cells": format_cell_list(S, result.poly, classes, result.header_fields())}
    if bitmap:
        pix, w, h = bitmap_bytes(S, classes)
        out["bitmap"] = pix
        out["sidecar"] = bitmap_sidecar(S, w, h)
    return out


def write_render(result: RenderResult, cells_path, bitmap_path=None) -> None:
    payload = render_payloads(result, bitmap=bitmap_path is not None)
    atomic_write(cells_path, payload["cells"])
    if bitmap_path is not None:
        atomic_write(bitmap_path, payload["bitmap"])
        atomic_write(os.fspath(bitmap_path) + ".txt", payload["sidecar"])
