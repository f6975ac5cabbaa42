"""Intrinsic one-arm decay on the seven-dimensional lattice.

Above six dimensions critical percolation is mean-field: the probability
that the open cluster of the origin reaches intrinsic distance r decays
like 1/r, the same law as on a tree.  This script estimates the critical
point by finite-size crossing of r * P(H(r)), then shows that statistic is
flat across a decade of radii while the expected ball volume stays linear
in r.  Runtime: several minutes (the d=7 exploration kernel is compiled on
first use).
"""

from perclab.estimators import estimate_pc, lattice_ball_curves
from perclab.lattice import LatticeSpec

spec = LatticeSpec(d=7)
print("estimating p_c by crossing of r*P(H(r)) at r = 16, 32 ...")
est = estimate_pc(spec, r_probe=16, trials=20000, seed=11, workers=2)
print(f"  p_c estimate: {est.p_hat:.5f} +- {est.uncertainty:.5f}\n")

curves = lattice_ball_curves(spec.with_p(est.p_hat), rmax=64, trials=30000,
                             seed=12, workers=2)
print("r     r*P(H(r))      E|B(0,r)|/r")
for r in (8, 16, 32, 64):
    hp, hse = curves.h_prob(r)
    vol, _ = curves.volume(r)
    print(f"{r:3d}    {r * hp:6.3f}+-{r * hse:5.3f}    {vol / r:6.3f}")
print("\nBoth columns are flat to within small factors: the one-arm")
print("probability decays like 1/r and ball volume grows linearly, the")
print("mean-field (tree) laws, eight radii octaves below any asymptopia.")
