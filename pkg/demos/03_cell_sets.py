"""Sets made of grid squares, and how far apart two of them are.

Every approximation the renderer outputs is a finite union of closed grid
squares.  This script builds a few, grows one by a radius, and bounds
Hausdorff distances between them.
"""

from filledjulia.cells import CellSet, contained_in, from_disks, hausdorff_upper, neighborhood
from filledjulia.dyadic import Dyadic, DyadicComplex

# Squares of side 2^-4 meeting the unit disk
disk = from_disks([(DyadicComplex.of(0), Dyadic(1))], 4)
print("unit disk at depth 4:", len(disk), "squares")

# A single square and its closed neighbourhood of radius one side
one = CellSet(4, [[0, 0]])
print("neighbourhood of one square:", len(neighborhood(one, Dyadic(1, -4))), "squares")

# Two disks; the smaller lies inside the larger
small = from_disks([(DyadicComplex.of(0), Dyadic(1, -1))], 4)
print("small inside large:", contained_in(small, disk), " large inside small:", contained_in(disk, small))
print("Hausdorff distance bound:", float(hausdorff_upper(small, disk)), "(exact value 0.5)")

# Growing the small disk by 1/2 lands within a diagonal of the large one
grown = neighborhood(small, Dyadic(1, -1))
print("grown vs large:", float(hausdorff_upper(grown, disk)))
