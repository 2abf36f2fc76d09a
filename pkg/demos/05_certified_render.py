"""The sandwich: certify when the outer set fits inside the inner cover.

For z^2 - 2 the filled Julia set is the segment [-2, 2], which has no
interior, and the loop certifies after a few steps.  For z^2 the filled
Julia set is the closed unit disk; the loop never certifies and the
diagnostics show why.
"""

from filledjulia import Budgets, render_filled_julia
from filledjulia.driver import certify_hypothesis_diagnostics
from filledjulia.oracle import parse_polynomial


def show(step):
    gap = "inf" if step.gap is None else f"{float(step.gap):.4f}"
    print(f"  k={step.k} periods={step.periods} outer={step.outer_cells} inner={step.inner_cells} gap<={gap}")


print("z^2 - 2 at m = 3")
res = render_filled_julia(parse_polynomial("-2,0,1"), 3, progress=show)
print("status:", res.status.value, " output squares:", len(res.output), " side:", float(res.output.side))

xs = res.output.cells[:, 0] * float(res.output.side)
print(f"output spans x in [{xs.min():.3f}, {xs.max() + float(res.output.side):.3f}]")

print()
print("z^2 at m = 2 with small budgets")
res = render_filled_julia(parse_polynomial("0,0,1"), 2, Budgets(max_k=6, max_period=4))
print(certify_hypothesis_diagnostics(res))
