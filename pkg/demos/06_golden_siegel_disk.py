"""The golden-mean quadratic z^2 + exp(2 pi i theta) z.

The fixed point 0 is surrounded by a Siegel disk on which the map is a
rotation.  The critical orbit runs along the disk's boundary, so its closest
approach to 0 over the first q_n steps bounds the inner radius from above.
"""

from filledjulia import Budgets, SiegelParams, golden_inner_radius_upper, render_siegel_with_radius
from filledjulia.dyadic import Dyadic

est = golden_inner_radius_upper(12)
print("precision used:", est.prec, "bits")
for q, hi, lo in zip(est.q, est.upper, est.lower):
    print(f"q={q:4d}  {float(lo):.15f} <= min |P^i(c)| <= {float(hi):.15f}")

# With a trusted inner radius the renderer can try to certify the whole set.
# At desk-scale budgets it usually reports that it ran out.
res = render_siegel_with_radius(SiegelParams(rho=Dyadic(1, -3), n=2), Budgets(max_k=6))
print("siegel render:", res.status.value, "-", res.cause)
for s in res.diagnostics:
    print(f"  k={s.k} outer={s.outer_cells} inside={s.inner_cells}")
