"""Command-line entry point.

Exit codes: 0 on success, 2 when a render runs out of budget without
certifying (a diagnostics file is written), 1 on usage or resource errors.
Every file is written through a temporary file and a rename, and nothing is
written on the error paths.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Union

from .driver import (
    Budgets,
    SiegelParams,
    Status,
    StepRecord,
    atomic_write,
    certify_hypothesis_diagnostics,
    golden_inner_radius_upper,
    render_filled_julia,
    render_payloads,
    render_siegel_with_radius,
)
from .dyadic import Dyadic, parse_dyadic, parse_rational
from .errors import PreconditionError, ResourceError
from .inner import center_tolerance
from .oracle import GOLDEN, Polynomial, parse_polynomial
from .outer import escape_radius
from .roots import enumerate_repelling, format_certificates

SUBCOMMANDS = ("render", "points", "siegel-render", "siegel-estimate", "escape")


class UsageError(Exception):
    def __init__(self, problems: Sequence[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass
class RunConfig:
    subcommand: str
    poly_text: Optional[str] = None
    poly: Optional[Polynomial] = None
    m: int = 3
    budgets: Budgets = Budgets()
    out: Optional[str] = None
    bitmap: Optional[str] = None
    workers: int = 1
    rho: Optional[Dyadic] = None
    n: Optional[int] = None
    theta: Union[str, Fraction] = GOLDEN
    quiet: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError([message])


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="filledjulia", add_help=True,
                 description="Certified pictures of filled Julia sets of polynomials.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--poly")
    ap.add_argument("-m", type=str)
    ap.add_argument("--max-k", type=str)
    ap.add_argument("--max-period", type=str)
    ap.add_argument("--max-depth", type=str)
    ap.add_argument("--rho")
    ap.add_argument("--theta")
    ap.add_argument("--n", type=str)
    ap.add_argument("--out")
    ap.add_argument("--bitmap")
    ap.add_argument("--workers", type=str)
    ap.add_argument("--quiet", action="store_true")
    return ap


def _int(problems: List[str], flag: str, text: Optional[str], lo: int) -> Optional[int]:
    if text is None:
        return None
    try:
        v = int(text)
    except ValueError:
        problems.append(f"{flag}: expected an integer, got {text!r}")
        return None
    if v < lo:
        problems.append(f"{flag} must be >= {lo}")
        return None
    return v


_VALUE_FLAGS = ("--poly", "-m", "--max-k", "--max-period", "--max-depth", "--rho", "--theta",
                "--n", "--out", "--bitmap", "--workers")


def _glue(argv: Sequence[str]) -> List[str]:
    # "--poly -2,0,1" would otherwise read "-2,0,1" as a flag
    out: List[str] = []
    it = iter(argv)
    for a in it:
        if a in _VALUE_FLAGS:
            v = next(it, None)
            out.append(a if v is None else f"{a}={v}")
        else:
            out.append(a)
    return out


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Validate ``argv`` completely; raise :class:`UsageError` listing every problem."""
    problems: List[str] = []
    ns, unknown = _build_parser().parse_known_args(_glue(argv))
    problems.extend(f"unknown argument {u!r}" for u in unknown)
    cmd = ns.subcommand
    cfg = RunConfig(cmd, quiet=ns.quiet)

    m = _int(problems, "-m", ns.m, 1)
    max_k = _int(problems, "--max-k", ns.max_k, 1)
    max_period = _int(problems, "--max-period", ns.max_period, 1)
    max_depth = _int(problems, "--max-depth", ns.max_depth, 1)
    workers = _int(problems, "--workers", ns.workers, 1)
    n = _int(problems, "--n", ns.n, 1)
    if m is not None:
        cfg.m = m
    if workers is not None:
        cfg.workers = workers
    defaults = Budgets()
    cfg.budgets = Budgets(max_k if max_k is not None else defaults.max_k,
                          max_period if max_period is not None else defaults.max_period,
                          max_depth)
    cfg.n = n
    cfg.out, cfg.bitmap = ns.out, ns.bitmap

    if ns.poly is not None:
        cfg.poly_text = ns.poly
        try:
            cfg.poly = parse_polynomial(ns.poly)
        except (ValueError, PreconditionError) as exc:
            problems.append(f"--poly: {exc}")
    elif cmd in ("render", "points", "escape"):
        problems.append(f"{cmd} requires --poly")

    if ns.rho is not None:
        try:
            cfg.rho = parse_dyadic(ns.rho)
            if not Dyadic(0) <= cfg.rho < 1:
                problems.append("--rho must satisfy 0 <= rho < 1")
        except ValueError as exc:
            problems.append(f"--rho: {exc}")
    if ns.theta is not None:
        if ns.theta.strip() == GOLDEN:
            cfg.theta = GOLDEN
        else:
            try:
                cfg.theta = parse_rational(ns.theta)
            except ValueError as exc:
                problems.append(f"--theta: {exc}")

    if cmd == "render" and ns.out is None:
        problems.append("render requires --out")
    if cmd == "siegel-render":
        if ns.rho is None:
            problems.append("siegel-render requires --rho")
        if ns.out is None:
            problems.append("siegel-render requires --out")
        if ns.poly is not None:
            problems.append("siegel-render takes --theta, not --poly")
    if cmd == "siegel-estimate" and n is None and ns.n is None:
        problems.append("siegel-estimate requires --n")
    if cmd == "points" and ns.max_period is None:
        problems.append("points requires --max-period")
    if ns.bitmap is not None and cmd not in ("render", "siegel-render"):
        problems.append(f"--bitmap is not used by {cmd}")
    for path in (ns.out, ns.bitmap):
        if path is not None:
            d = os.path.dirname(os.path.abspath(path))
            if not os.path.isdir(d):
                problems.append(f"output directory does not exist: {d}")
    if problems:
        raise UsageError(problems)
    return cfg


def _progress(cfg: RunConfig):
    if cfg.quiet:
        return None

    def show(rec: StepRecord) -> None:
        gap = "inf" if rec.gap is None else f"{float(rec.gap):.4g}"
        print(f"k={rec.k} periods={rec.periods} outer={rec.outer_cells} inner={rec.inner_cells} gap<={gap}",
              file=sys.stderr, flush=True)

    return show


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        atomic_write(cfg.out, text)


def _finish_render(cfg: RunConfig, result) -> int:
    if result.status == Status.CERTIFIED:
        payload = render_payloads(result, bitmap=cfg.bitmap is not None)
        atomic_write(cfg.out, payload["cells"])
        if cfg.bitmap is not None:
            atomic_write(cfg.bitmap, payload["bitmap"])
            atomic_write(cfg.bitmap + ".txt", payload["sidecar"])
        return 0
    report = certify_hypothesis_diagnostics(result) or f"status={result.status.value}\ncause: {result.cause}\n"
    atomic_write(cfg.out + ".diagnostics.txt", report)
    print(f"not certified: {result.cause}", file=sys.stderr)
    return 2


def dispatch(cfg: RunConfig) -> int:
    cmd = cfg.subcommand
    if cmd == "escape":
        er = escape_radius(cfg.poly)
        _emit(cfg, f"{er.b} {float(er.b):.17g}\n")
        return 0
    if cmd == "points":
        certs = enumerate_repelling(cfg.poly, cfg.budgets.max_period, center_tolerance(cfg.m),
                                    workers=cfg.workers)
        header = (f"poly={cfg.poly.describe()} max_period={cfg.budgets.max_period} "
                  f"eps={center_tolerance(cfg.m)} count={len(certs)}")
        _emit(cfg, format_certificates(certs, header))
        return 0
    if cmd == "siegel-estimate":
        est = golden_inner_radius_upper(cfg.n)
        lines = [f"# golden rotation, critical orbit closest approach to 0 (precision {est.prec} bits)",
                 "# j q_j s_j_upper s_j_lower s_j_upper_float"]
        for j, (q, hi, lo) in enumerate(zip(est.q, est.upper, est.lower), start=1):
            lines.append(f"{j} {q} {hi} {lo} {float(hi):.17g}")
        _emit(cfg, "\n".join(lines) + "\n")
        return 0
    if cmd == "render":
        result = render_filled_julia(cfg.poly, cfg.m, cfg.budgets, workers=cfg.workers,
                                     progress=_progress(cfg))
        return _finish_render(cfg, result)
    if cmd == "siegel-render":
        sp = SiegelParams(cfg.theta, cfg.rho, cfg.m)
        result = render_siegel_with_radius(sp, cfg.budgets, workers=cfg.workers, progress=_progress(cfg))
        return _finish_render(cfg, result)
    raise PreconditionError(f"unknown subcommand {cmd}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        for p in exc.problems:
            print(f"usage error: {p}", file=sys.stderr)
        return 1
    except SystemExit as exc:   # --help
        return int(exc.code or 0)
    try:
        return dispatch(cfg)
    except (ResourceError, PreconditionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
