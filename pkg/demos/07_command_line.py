"""The same procedures from the command line.

Exit status 0 means a certified output was written, 2 means the budgets
ran out without certifying (a diagnostics file is written instead), and 1
means a usage or resource error.
"""

import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    r = subprocess.run([sys.executable, "-m", "filledjulia.cli", *args], capture_output=True, text=True)
    print("$ filledjulia", " ".join(args), f"  -> exit {r.returncode}")
    if r.stdout:
        print("  " + "\n  ".join(r.stdout.splitlines()[:6]))
    return r.returncode


with tempfile.TemporaryDirectory() as d:
    out = Path(d)
    run("escape", "--poly", "0,-3,0,1")
    run("points", "--poly", "-1,0,1", "--max-period", "2")
    run("siegel-estimate", "--n", "6")
    run("render", "--poly", "-2,0,1", "-m", "3", "--out", str(out / "cheb.cells"),
        "--bitmap", str(out / "cheb.raw"), "--quiet")
    print("  header:", (out / "cheb.cells").read_text().splitlines()[0])
    run("render", "--poly", "0,0,1", "-m", "2", "--max-k", "4", "--max-period", "3",
        "--out", str(out / "disk.cells"), "--quiet")
    print("  files:", sorted(p.name for p in out.iterdir()))
    run("render", "--poly", "1,x,1", "--out", str(out / "bad.cells"))
