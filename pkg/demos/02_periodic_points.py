"""Finding and certifying periodic points.

A point of period n is a root of p^n(z) - z.  The census isolates every
root in the escape disk, counts multiplicities by winding numbers, and then
proves each simple root repelling or attracting with an explicit
certificate that anyone can re-check.
"""

from filledjulia.dyadic import Dyadic
from filledjulia.oracle import parse_polynomial
from filledjulia.roots import OrbitKind, enumerate_repelling, find_trap_disk, periodic_census, verify_certificate

p = parse_polynomial("0,0,1")
eps = Dyadic(1, -8)

for rec in periodic_census(p, 3, eps):
    rep = rec.count(OrbitKind.REPELLING)
    att = rec.count(OrbitKind.ATTRACTING)
    print(f"period {rec.period}: {rec.total_count} roots with multiplicity, {rep} repelling, {att} attracting")

# Each certificate carries a centre, an isolation radius and derivative bounds.
certs = enumerate_repelling(p, 3, eps)
for c in certs[:4]:
    print(f"  period {c.period}: centre {complex(c.center):.6f}, radius {float(c.radius):.2g}, "
          f"|multiplier| >= {float(c.derivative_bound):.4f}, re-verified: {verify_certificate(p, c)}")
print(f"  ... {len(certs)} distinct repelling points in total")

# Attracting points come with a trap disk: a disk mapped into itself.
zero = [c for c in periodic_census(p, 1, eps)[0].certificates if c.kind == OrbitKind.ATTRACTING][0]
trap = find_trap_disk(p, zero)
print("trap disk around 0 of radius", float(trap.radius))

# z^2 - 2 has real fixed points 2 and -1, both repelling.
cheb = enumerate_repelling(parse_polynomial("-2,0,1"), 1, eps)
print("z^2 - 2 fixed points:", [round(complex(c.center).real, 6) for c in cheb])
