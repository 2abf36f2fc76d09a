"""The outer approximation: squares that may fail to escape.

Outside the escape radius b every orbit runs off to infinity, so the filled
Julia set lies in the k-th preimage of the disk of radius b.  The quadtree
below classifies squares as certainly escaping (OUT), certainly staying for
k steps (IN), or undecided at the finest size (BND).
"""

import numpy as np

from filledjulia.dyadic import Dyadic
from filledjulia.oracle import parse_polynomial
from filledjulia.outer import advance, escape_radius, preimage_approx

p = parse_polynomial("-1,0,1")
er = escape_radius(p)
print("escape radius for", p.describe(), "is", float(er.b))

grid = preimage_approx(p, er, 2, Dyadic(1, -5))
for k in (2, 4, 8, 16):
    grid = advance(grid, k)
    print(f"k={k:2d}: {grid.counts()}")


def ascii(S, width=64):
    """Crude text picture of a cell set, one character per square column pair."""
    xs, ys = S.cells[:, 0], S.cells[:, 1]
    step = max(1, (xs.max() - xs.min() + 1) // width)
    rows = []
    for y in range(ys.max(), ys.min() - 1, -2 * step):
        line = ""
        for x in range(xs.min(), xs.max() + 1, step):
            hit = np.any((xs >= x) & (xs < x + step) & (ys <= y) & (ys > y - 2 * step))
            line += "#" if hit else " "
        rows.append(line.rstrip())
    return "\n".join(rows)


print(ascii(grid.union))
