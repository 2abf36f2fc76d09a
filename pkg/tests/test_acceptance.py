"""Acceptance criteria, each printed as one PASS/FAIL line at the end of the run.

Renders go through the command-line interface, so the files checked here
are exactly what a user would get.
"""

import math
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy.spatial import cKDTree

from filledjulia.cells import parse_cell_list
from filledjulia.dyadic import box_mul, parse_dyadic
from filledjulia.inner import center_tolerance, disk_radius, radius_budget
from filledjulia.oracle import Escaped, Polynomial, eval_enclosure, iterate_enclosure, parse_polynomial
from filledjulia.outer import escape_radius
from filledjulia.roots import OrbitKind, periodic_census, read_certificates, verify_certificate
from support import exact_eval, random_box, random_int_poly, random_point_in, record, uniform_segment


@contextmanager
def criterion(label, title):
    info = {}
    try:
        yield info
    except BaseException as exc:
        record(label, title, False, info.get("detail") or f"{type(exc).__name__}: {exc}"[:300])
        raise
    record(label, title, True, info.get("detail", ""))


def cli(*argv):
    t = time.time()
    r = subprocess.run([sys.executable, "-m", "filledjulia.cli", *argv, "--quiet"], capture_output=True, text=True)
    return r, time.time() - t


@pytest.fixture(scope="session")
def outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def render(outdir, poly, m, workers, *extra):
    out = outdir / f"render_{poly}_{m}_w{workers}.cells"
    r, secs = cli("render", "--poly", poly, "-m", str(m), "--workers", str(workers), "--out", str(out), *extra)
    return out, r, secs


def check_segment(path, m):
    """Two-sided comparison of a cell file with the segment [-2, 2]; returns (worst a, worst b)."""
    S, fields, _ = parse_cell_list(path.read_text())
    assert fields["status"] == "Certified"
    h = float(S.side)
    lo = S.cells.astype(float) * h
    centers = lo + h / 2
    # (b) every cell centre within 2^-m + diagonal of the segment
    dx = np.maximum(np.abs(centers[:, 0]) - 2, 0)
    b = float(np.hypot(dx, centers[:, 1]).max())
    # (a) samples of the segment within 2^-m of some cell
    xs = uniform_segment(10_000, seed=m)
    tree = cKDTree(centers)
    lim = 2.0 ** -m
    worst = 0.0
    for x, idx in zip(xs, tree.query_ball_point(np.stack([xs, np.zeros_like(xs)], axis=1), lim + h)):
        if not idx:
            worst = math.inf
            continue
        c = lo[idx]
        gx = np.maximum(np.maximum(c[:, 0] - x, x - (c[:, 0] + h)), 0)
        gy = np.maximum(np.maximum(c[:, 1], -(c[:, 1] + h)), 0)
        worst = max(worst, float(np.hypot(gx, gy).min()))
    return worst, b, h


@pytest.mark.parametrize("m", [3, 4, 5])
def test_1_chebyshev_segment(outdir, m):
    with criterion(f"1 m={m}", f"z^2-2 at m={m} certified within 2^-{m} of [-2,2]") as info:
        out, r, secs = render(outdir, "-2,0,1", m, 1)
        assert r.returncode == 0, r.stderr
        a, b, h = check_segment(out, m)
        info["detail"] = f"a={a:.3g} b={b:.4g} <= {2.0 ** -m + math.sqrt(2) * h:.4g}, {secs:.0f}s"
        assert a <= 2.0 ** -m
        assert b <= 2.0 ** -m + math.sqrt(2) * h
        assert secs <= 300


def test_2_cubic_chebyshev(outdir):
    with criterion("2", "z^3-3z at m=3 certified within 2^-3 of [-2,2]") as info:
        out, r, secs = render(outdir, "0,-3,0,1", 3, 1)
        assert r.returncode == 0, r.stderr
        a, b, h = check_segment(out, 3)
        info["detail"] = f"a={a:.3g} b={b:.4g}, {secs:.0f}s"
        assert a <= 2.0 ** -3 and b <= 2.0 ** -3 + math.sqrt(2) * h
        assert secs <= 600


def unit_circle_repelling_exactly(cert) -> bool:
    """Independent check for z^2: |(p^n)'| = 2^n |z|^(2^n - 1) > 1 on the whole certificate square."""
    n = cert.period
    c = cert.center
    cx, cy, r = c.re.to_fraction(), c.im.to_fraction(), cert.radius.to_fraction()
    # lower bound for |z| on the square: |c| - sqrt(2) r, with sqrt(2) < 3/2
    mod2 = cx * cx + cy * cy
    low = Fraction(math.isqrt(int(mod2 * 2 ** 80)), 2 ** 40) - Fraction(3, 2) * r
    return low > 0 and 2 ** n * low ** (2 ** n - 1) > 1 and abs(mod2 - 1) <= 4 * r


def test_3_squaring_census(outdir):
    with criterion("3", "z^2 census: multiplicities 2,4,8; repelling 1,3,7; 0 attracting; re-verified") as info:
        p = parse_polynomial("0,0,1")
        recs = periodic_census(p, 3, center_tolerance(3))
        assert [r.total_count for r in recs] == [2, 4, 8]
        assert [r.count(OrbitKind.REPELLING) for r in recs] == [1, 3, 7]
        for r in recs:
            att = [c for c in r.certificates if c.kind == OrbitKind.ATTRACTING]
            assert len(att) == 1 and att[0].box.contains_point(0)
            rep = [c for c in r.certificates if c.kind == OrbitKind.REPELLING]
            assert all(not c.box.contains_point(0) for c in rep)
            assert all(unit_circle_repelling_exactly(c) for c in rep)
            assert all(verify_certificate(p, c) for c in r.certificates)
        out = outdir / "points_w1.txt"
        res, _ = cli("points", "--poly", "0,0,1", "--max-period", "3", "-m", "3", "--workers", "1", "--out", str(out))
        assert res.returncode == 0, res.stderr
        _, certs = read_certificates(out)
        # distinct points of period dividing 1, 2, 3 on the unit circle: 1 + 2 + 6
        assert [c.period for c in certs] == [1, 2, 2, 3, 3, 3, 3, 3, 3]
        assert all(verify_certificate(p, c) and unit_circle_repelling_exactly(c) for c in certs)
        info["detail"] = f"{len(certs)} distinct repelling points re-verified"


def test_4_honest_non_termination(outdir):
    with criterion("4", "z^2 with k<=32, period<=8 exits 2 with a gap bounded away from 0") as info:
        out, r, secs = render(outdir, "0,0,1", 3, 1, "--max-k", "32", "--max-period", "8")
        assert r.returncode == 2, r.stderr
        assert not out.exists()
        report = (outdir / (out.name + ".diagnostics.txt")).read_text()
        rows = [line.split() for line in report.splitlines() if line[:1].isdigit()]
        gaps = [float(row[4]) for row in rows]
        assert len(gaps) == 32
        info["detail"] = f"final gap {gaps[-1]:.4g}, {secs:.0f}s"
        assert min(gaps[-8:]) > 0.5 and max(gaps[-8:]) - min(gaps[-8:]) < 0.01
        assert "stable" in report
        assert secs <= 600


def test_5_interval_soundness(tmp_path):
    with criterion("5", "10^5 inclusion tests and 10^3 refinement tests without violations") as info:
        rng = np.random.default_rng(20261016)
        violations = checks = 0
        for _ in range(40_000):
            a, b = random_box(rng), random_box(rng)
            c = box_mul(a, b)
            violations += not c.contains_point(random_point_in(rng, a) * random_point_in(rng, b))
            checks += 1
        for _ in range(40_000):
            coeffs = random_int_poly(rng)
            x = random_box(rng)
            r = eval_enclosure(Polynomial(coeffs), x, int(rng.integers(4, 61)))
            violations += not r.contains_point(exact_eval(coeffs, random_point_in(rng, x)))
            checks += 1
        for _ in range(20_000):
            coeffs = random_int_poly(rng, degree=2, mag=1)
            p = Polynomial(coeffs)
            x = random_box(rng, mag=1, max_exp=-8)
            k = int(rng.integers(1, 4))
            r = iterate_enclosure(p, x, k, 24)
            w = random_point_in(rng, x, extra_bits=4)
            steps = r.step if isinstance(r, Escaped) else k
            for _ in range(steps):
                w = exact_eval(coeffs, w)
            if isinstance(r, Escaped):
                b = escape_radius(p).b
                violations += not w.abs2() > b * b
            else:
                violations += not r.contains_point(w)
            checks += 1
        mono = 0
        for _ in range(1000):
            coeffs = random_int_poly(rng)
            p = Polynomial(coeffs)
            x = random_box(rng)
            prec = int(rng.integers(4, 61))
            parent = eval_enclosure(p, x, prec)
            for q in x.split():
                mono += not parent.contains(eval_enclosure(p, q, prec))
        info["detail"] = f"{checks} inclusion checks, {violations} violations; 1000 refinements, {mono} violations"
        assert checks == 100_000 and violations == 0 and mono == 0


def test_6_radius_budget():
    with criterion("6", "2^-(m+2) + 2^-(m+3) + 2^-(m+3) = 2^-(m+1) for m = 1..30"):
        for m in range(1, 31):
            terms = radius_budget(m)
            assert terms == (Fraction(1, 2 ** (m + 2)), Fraction(1, 2 ** (m + 3)), Fraction(1, 2 ** (m + 3)))
            assert sum(terms) == Fraction(1, 2 ** (m + 1)) == disk_radius(m).to_fraction()


def test_7_golden_estimator():
    with criterion("7", "siegel-estimate --n 12 against a 200-bit orbit") as info:
        r, secs = cli("siegel-estimate", "--n", "12")
        assert r.returncode == 0, r.stderr
        rows = [line.split() for line in r.stdout.splitlines() if not line.startswith("#")]
        q = [int(row[1]) for row in rows]
        hi = [parse_dyadic(row[2]) for row in rows]
        lo = [parse_dyadic(row[3]) for row in rows]
        assert q == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233]
        assert all(a >= b for a, b in zip(hi, hi[1:])) and all(s > 0 for s in lo)
        mpmath.mp.prec = 200
        lam = mpmath.expj(2 * mpmath.pi * (mpmath.sqrt(5) - 1) / 2)
        z = -lam / 2
        best, mins = abs(z), {0: abs(-lam / 2)}
        for i in range(1, q[-1] + 1):
            z = z * z + lam * z
            best = min(best, abs(z))
            mins[i] = best
        slack = mpmath.mpf(2) ** -150   # the oracle's own rounding, generously
        worst = 0
        for qq, a, b in zip(q, lo, hi):
            lo_mp = mpmath.ldexp(a.mantissa, a.exponent)
            hi_mp = mpmath.ldexp(b.mantissa, b.exponent)
            assert lo_mp - slack <= mins[qq] <= hi_mp + slack
            worst = max(worst, float(hi_mp - mins[qq]))
        info["detail"] = f"s_12 = {float(hi[-1]):.12g}, max upper-bound excess {worst:.2g}, {secs:.1f}s"
        assert secs <= 60


@pytest.mark.parametrize("m", [3, 4, 5])
def test_8_determinism_render(outdir, m):
    with criterion(f"8 m={m}", f"render z^2-2 m={m}: --workers 1 and 8 give identical files") as info:
        one = outdir / f"render_-2,0,1_{m}_w1.cells"
        if not one.exists():
            one, r, _ = render(outdir, "-2,0,1", m, 1)
            assert r.returncode == 0
        eight, r, secs = render(outdir, "-2,0,1", m, 8)
        assert r.returncode == 0, r.stderr
        info["detail"] = f"{len(one.read_bytes())} bytes, {secs:.0f}s with 8 workers"
        assert one.read_bytes() == eight.read_bytes()


def test_8_determinism_points(outdir):
    with criterion("8 points", "points z^2 period 3: --workers 1 and 8 give identical files"):
        files = []
        for w in (1, 8):
            out = outdir / f"points_det_w{w}.txt"
            r, _ = cli("points", "--poly", "0,0,1", "--max-period", "3", "-m", "3", "--workers", str(w),
                       "--out", str(out))
            assert r.returncode == 0, r.stderr
            files.append(out.read_bytes())
        assert files[0] == files[1]
