"""Walk exponents on the size-biased critical tree, at coffee-break scale.

The size-biased tree (infinite spine + critical bushes) is the exact
incipient cluster of the 3-regular tree, where every exponent is known:
ball volume grows like r^2, the return probability decays like n^{-2/3},
the hitting time of depth r grows like r^3, and the walk range like n^{2/3}.
This script samples a few hundred trees and prints the measured slopes next
to those targets.  Runtime: a couple of minutes.
"""

from functools import partial

import numpy as np

from perclab.estimators import FitPolicy, WALK_POLICY, fit_exponent
from perclab.tree import TreeSpec, kesten_level_sizes, sample_kesten_tree
from perclab.walk import (annealed_range_curve, annealed_return_curve,
                          annealed_tau_curve)

ELL = 3
spec = TreeSpec(ELL)
sampler = partial(lambda s, R, seed: sample_kesten_tree(s, R, seed), spec)

print("== ball volume: E|B(0,r)| ~ r^2 ==")
R = 512
lv = kesten_level_sizes(spec, R, samples=4000, seed=1)
vols = np.cumsum(lv, axis=1)
pts = []
for r in (16, 32, 64, 128, 256, 512):
    col = vols[:, r]
    pts.append((r, col.mean(), col.std(ddof=1) / np.sqrt(len(col))))
    print(f"  r={r:4d}  E|B| = {col.mean():9.1f}")
fit = fit_exponent(pts, FitPolicy(policy_id="demo-volume"))
print(f"  volume exponent: {fit.slope:.3f} (target 2)\n")

print("== return probability: p_2n(0,0) ~ n^{-2/3} ==")
n_list = [int(x) for x in np.unique(np.round(np.logspace(2, 4, 7)))]
curve = annealed_return_curve(sampler, r_schedule=lambda n: 128, n_list=n_list,
                              samples=60, seed=2, workers=2)
for n, m in zip(curve.scale, curve.mean):
    print(f"  n={int(n):6d}  mean p_2n = {m:.5f}")
fit = fit_exponent(curve.points(), WALK_POLICY)
print(f"  spectral slope: {fit.slope:.3f} (target -2/3 ~ -0.667)\n")

print("== hitting time of depth r: E tau_r ~ r^3 ==")
tau = annealed_tau_curve(sampler, [16, 32, 64, 128], samples=30, trials=400,
                         seed=3, workers=2)
for r, m in zip(tau.scale, tau.mean):
    print(f"  r={int(r):4d}  E tau = {m:10.0f}")
local = np.diff(np.log(tau.mean)) / np.log(2)
print(f"  local slopes {np.round(local, 2)} -> 3 as r grows\n")

print("== walk range: E|W_n| ~ n^{2/3} ==")
cps = [int(x) for x in np.unique(np.round(np.logspace(3, 5, 5)))]
rng_curve = annealed_range_curve(sampler, cps, samples=30, trials=8, seed=4,
                                 workers=2)
for n, m in zip(rng_curve.scale, rng_curve.mean):
    print(f"  n={int(n):6d}  E|W_n| = {m:8.1f}")
fit = fit_exponent(rng_curve.points(), FitPolicy(policy_id="demo-range"))
print(f"  range exponent: {fit.slope:.3f} (target 2/3 ~ 0.667)")
