"""Dyadic numbers, boxes, and what an enclosure promises.

Everything the renderer decides rests on one promise: the box returned by
an evaluation contains every exact value.  This script shows that promise
on a few small cases and then checks it against exact rational arithmetic.
"""

from filledjulia.dyadic import ComplexBox, Dyadic, DyadicComplex, box_mul
from filledjulia.oracle import Escaped, eval_enclosure, iterate_enclosure, parse_polynomial

# Dyadics are m * 2^e, kept in lowest terms, and add and multiply exactly.
x = Dyadic(3, -2)
print("3/4 as a dyadic:", x, "=", x.to_fraction())
print("x*x + 1/8 =", (x * x + Dyadic(1, -3)).to_fraction())

# A complex box is a rectangle with dyadic corners.  The product of two
# boxes is a rectangle containing every product of their points.
i = ComplexBox.point(DyadicComplex(Dyadic(0), Dyadic(1)))
print("i * i =", box_mul(i, i))
unit = ComplexBox.from_bounds(0, 1, 0, 1)
print("[0,1]^2 * [0,1]^2 =", box_mul(unit, unit))

# Polynomials are given by coefficient lists, lowest degree first.
p = parse_polynomial("-2,0,1")
print("p =", p.describe(), " degree", p.degree)
box = ComplexBox.from_bounds("1/2", "5/8", "-1/16", "1/16")
img = eval_enclosure(p, box, 30)
print("p over", box, "lies in", img)

# spot check: the corner 5/8 maps to 25/64 - 2, computed exactly
corner = Dyadic(5, -3)
value = corner * corner - Dyadic(2)
print("p(5/8) =", value.to_fraction(), " inside:", img.contains_point(value))

# Iterating: either an enclosure of p^k(box), or the first step at which the
# whole box has certainly left the escape disk.
sq = parse_polynomial("0,0,1")
print("z^2, three steps from 1/2:", iterate_enclosure(sq, ComplexBox.point(Dyadic(1, -1)), 3, 20))
r = iterate_enclosure(sq, ComplexBox.point(3), 3, 20)
print("z^2 from 3:", r, "(escaped)" if isinstance(r, Escaped) else "")

# Irrational coefficients are answered to any requested precision.
rot = parse_polynomial("0,golden,1")
for prec in (10, 40, 80):
    c = rot.coefficient_box(1, prec)
    print(f"golden rotation coefficient at 2^-{prec}: width {float(c.width):.3g}")
