"""Acceptance experiments: every exit criterion at its stated tolerance.

Each test prints one line

    ACCEPTANCE <n>: PASS|FAIL -- <measured quantity vs band>

(run with ``pytest tests/test_acceptance.py -v -s`` to see them live).
Sample counts honor the stated minimums; tolerances are pinned here and
nowhere else.  The heavy criteria are sized for an 8-thread desktop within
their stated budgets; on fewer cores they simply take proportionally
longer.

Criterion 2 is expected to FAIL as stated: the hitting-time window
r in {8,...,128} starts deep in the pre-asymptotic regime, where the
intrinsic ball still carries a linear (spine-dominated) volume term, and
the straight log-log fit over the full window measures ~2.7 regardless of
tree degree or sample count.  The test prints the rising local slopes and
the tail-window fit (r >= 32, inside the band) that demonstrate the
asymptotic exponent; the assert itself is kept faithful to the stated
window.
"""

import os
from functools import partial

import numpy as np
import pytest

from perclab.cluster import explore_ball
from perclab.estimators import (FitPolicy, WALK_POLICY, cluster_tail_probe,
                                estimate_pc, fit_exponent,
                                lattice_ball_curves)
from perclab.graphs import GraphSample, from_intrinsic_ball
from perclab.lattice import LatticeSpec, PercolationConfig, eager_box_config
from perclab.resistance import (commute_time_check, effective_resistance,
                                nash_williams_bound, resistance_to_level)
from perclab.rng import derive_seed
from perclab.tree import TreeSpec, kesten_level_sizes, sample_kesten_tree
from perclab.walk import (annealed_range_curve, annealed_return_curve,
                          annealed_tau_curve, default_r_schedule,
                          return_probability_exact, simulate_walk)

from _oracles import (bfs_ball_over_table, dense_effective_resistance,
                      random_connected_graph)

WORKERS = min(8, os.cpu_count() or 1)
ELL3 = TreeSpec(3)


def _kesten3(R, seed):
    return sample_kesten_tree(ELL3, R, seed)


def report(num, passed, detail):
    print(f"\nACCEPTANCE {num}: {'PASS' if passed else 'FAIL'} -- {detail}")
    return passed


def test_criterion_01_tree_spectral_dimension():
    n_list = [int(x) for x in np.unique(np.round(np.logspace(2, 5, 13)))]
    curve = annealed_return_curve(_kesten3, default_r_schedule, n_list,
                                  samples=200, seed=101, workers=WORKERS)
    fit = fit_exponent(curve.points(), WALK_POLICY)
    ok = (-0.73 <= fit.slope <= -0.60) and curve.samples_used >= 200
    assert report(1, ok,
                  f"annealed p_2n slope {fit.slope:+.4f} "
                  f"(band [-0.73, -0.60]), {curve.samples_used} samples, "
                  f"{curve.flagged} flagged, {curve.redraws} redraws")


def test_criterion_02_tree_walk_dimension():
    r_list = [8, 16, 32, 64, 128]
    curve = annealed_tau_curve(_kesten3, r_list, samples=40, trials=1000,
                               seed=102, workers=WORKERS)
    fit = fit_exponent(curve.points(), FitPolicy(policy_id="tau-stated"))
    local = np.diff(np.log(curve.mean)) / np.log(2)
    tail = fit_exponent(curve.points()[2:],
                        FitPolicy(min_points=3, policy_id="tau-tail"))
    ok = 2.8 <= fit.slope <= 3.2
    report(2, ok,
           f"E tau_r slope {fit.slope:+.4f} over r in {r_list} "
           f"(band [2.8, 3.2]); local slopes {np.round(local, 2)} rise "
           f"toward 3; tail fit r>=32 gives {tail.slope:+.3f} "
           f"(in band: {2.8 <= tail.slope <= 3.2})")
    assert ok, ("stated window includes the pre-asymptotic regime; "
                "see decisions ledger -- the tail window confirms the "
                f"exponent ({tail.slope:+.3f})")


def test_criterion_03_tree_range_exponent():
    cps = [int(x) for x in np.unique(np.round(np.logspace(3, 6, 10)))]
    curve = annealed_range_curve(_kesten3, cps, samples=40, trials=10,
                                 seed=103, workers=WORKERS)
    fit = fit_exponent(curve.points(), FitPolicy(policy_id="range"))
    ok = 0.60 <= fit.slope <= 0.73 and curve.flagged == 0
    assert report(3, ok,
                  f"mean |W_n| slope {fit.slope:+.4f} over n in "
                  f"[1e3, 1e6] (band [0.60, 0.73])")


def test_criterion_04_iic_volume_exponent():
    samples = 10000
    lv = kesten_level_sizes(ELL3, 1024, samples, seed=104)
    vols = np.cumsum(lv, axis=1)
    pts = []
    for r in (16, 32, 64, 128, 256, 512, 1024):
        col = vols[:, r].astype(float)
        pts.append((r, col.mean(), col.std(ddof=1) / np.sqrt(samples)))
    fit = fit_exponent(pts, FitPolicy(policy_id="iic-volume"))
    ok = 1.9 <= fit.slope <= 2.1
    assert report(4, ok,
                  f"E|B(0,r)| slope {fit.slope:+.4f} over r in [2^4, 2^10], "
                  f"{samples} samples (band [1.9, 2.1])")


def test_criterion_05_resistance_linearity():
    samples = 100
    medians = {}
    nw_ok = 0
    nw_total = 0
    for r in (16, 32, 64, 128, 256, 512):
        ratios = []
        for i in range(samples):
            g = sample_kesten_tree(ELL3, r, derive_seed(105, r * 1000 + i))
            exact = resistance_to_level(g, r).r_eff
            bound = nash_williams_bound(g, r).r_eff
            nw_total += 1
            if bound <= exact + 1e-8:
                nw_ok += 1
            ratios.append(exact / r)
        medians[r] = float(np.median(ratios))
    band = max(medians.values()) / min(medians.values())
    ok = band <= 3.0 and nw_ok == nw_total
    assert report(5, ok,
                  f"median R_eff/r by r: "
                  f"{ {r: round(v, 3) for r, v in medians.items()} }, "
                  f"max/min {band:.2f} (<= 3); Nash-Williams <= exact on "
                  f"{nw_ok}/{nw_total} samples")


_D7_CACHE = {}


def _d7_curves():
    if "curves" not in _D7_CACHE:
        spec = LatticeSpec(d=7)
        est = estimate_pc(spec, r_probe=16, trials=50000, seed=600,
                          workers=WORKERS)
        curves = lattice_ball_curves(spec.with_p(est.p_hat), 64,
                                     100000, seed=601, budget=200000,
                                     workers=WORKERS)
        _D7_CACHE["pc"] = est
        _D7_CACHE["curves"] = curves
    return _D7_CACHE["pc"], _D7_CACHE["curves"]


def test_criterion_06_lattice_intrinsic_one_arm():
    est, curves = _d7_curves()
    rh = {r: r * curves.h_prob(r)[0] for r in (8, 16, 32, 64)}
    band = max(rh.values()) / min(rh.values())
    ok = band <= 3.0 and curves.trials_ok >= 100000
    assert report(6, ok,
                  f"d=7 at p_hat={est.p_hat:.5f}: r*P(H(r)) = "
                  f"{ {r: round(v, 3) for r, v in rh.items()} }, "
                  f"max/min {band:.2f} (<= 3), {curves.trials_ok} trials")


def test_criterion_07_lattice_volume_linearity():
    est, curves = _d7_curves()
    vv = {r: curves.volume(r)[0] / r for r in (8, 16, 32, 64)}
    band = max(vv.values()) / min(vv.values())
    ok = band <= 3.0
    assert report(7, ok,
                  f"d=7 at p_hat={est.p_hat:.5f}: E|B(0,r)|/r = "
                  f"{ {r: round(v, 3) for r, v in vv.items()} }, "
                  f"max/min {band:.2f} (<= 3)")


def test_criterion_08_cluster_tail_exponent():
    n_list = [int(x) for x in np.unique(np.round(np.logspace(2, 5, 10)))]
    curve = cluster_tail_probe(ELL3, n_list, trials=200000, seed=108)
    fit = fit_exponent(curve.points(), FitPolicy(policy_id="tail"))
    ok = -0.6 <= fit.slope <= -0.4
    assert report(8, ok,
                  f"tree-emulation P(|C|>n) slope {fit.slope:+.4f} over "
                  f"n in [1e2, 1e5] (band [-0.6, -0.4])")


def test_criterion_09_oracle_suites():
    details = []

    # (a) lazy-vs-eager exact structural match, 100 seeds, d=3 radius-8 box
    spec = LatticeSpec(d=3, p=0.2488, box_halfwidth=8)
    mismatches = 0
    for i in range(100):
        seed = derive_seed(901, i)
        cfg = PercolationConfig(spec, seed)
        table = eager_box_config(cfg, 8)
        lv, dist, edges = bfs_ball_over_table(table, (0, 0, 0), 8)
        ball = explore_ball(cfg, (0, 0, 0), 8)
        if not ([sorted(l) for l in ball.levels] == [sorted(l) for l in lv]
                and ball.dist == dist and ball.open_edges == edges):
            mismatches += 1
    details.append(f"lazy-vs-eager mismatches {mismatches}/100")

    # (b) resistance solver vs dense oracle, 500 graphs <= 12 vertices
    rng = np.random.default_rng(902)
    worst = 0.0
    for _ in range(500):
        adj, am = random_connected_graph(rng)
        g = GraphSample.from_adjacency(adj, 0, len(adj))
        t = [int(rng.integers(1, len(adj)))]
        ours = effective_resistance(g, 0, t).r_eff
        worst = max(worst, abs(ours - dense_effective_resistance(am, 0, t)))
    details.append(f"resistance worst |err| {worst:.2e}")

    # (c) commute-time identity on fixtures, 1e6 trials
    adj, _am = random_connected_graph(np.random.default_rng(903), 8, 8)
    g8 = GraphSample.from_adjacency(adj, 0, 8)
    chk = commute_time_check(g8, 0, 7, walk_trials=10**6, seed=904)
    path2 = GraphSample.from_adjacency([[1], [0, 2], [1]], 0, 2)
    chk2 = commute_time_check(path2, 0, 2, walk_trials=10**6, seed=905)
    commute_ok = 0.95 <= chk.ratio <= 1.05 and 0.95 <= chk2.ratio <= 1.05
    details.append(f"commute ratios {chk.ratio:.4f}, {chk2.ratio:.4f}")

    # (d) probability conservation and (e) monotone returns
    cons_worst = 0.0
    mono_ok = True
    fixtures = [GraphSample.from_adjacency(adj, 0, 8),
                sample_kesten_tree(ELL3, 64, seed=906),
                sample_kesten_tree(ELL3, 128, seed=907)]
    for g in fixtures:
        g = GraphSample(g.indptr, g.indices, g.origin, g.depth, 10**9)
        rc = return_probability_exact(g, list(range(1, 2049)),
                                      mass_tolerance=1.0)
        cons_worst = max(cons_worst, rc.conservation_err)
        mono_ok = mono_ok and rc.monotone
    details.append(f"conservation worst {cons_worst:.2e}, monotone {mono_ok}")

    # (f) Rayleigh monotonicity on 100 edge-deletion cases
    rng = np.random.default_rng(908)
    rayleigh_bad = 0
    cases = 0
    while cases < 100:
        adj, am = random_connected_graph(rng)
        n = len(adj)
        g = GraphSample.from_adjacency(adj, 0, n)
        before = effective_resistance(g, 0, [n - 1]).r_eff
        edges = g.edge_list()
        u, v = edges[rng.integers(0, len(edges))]
        am2 = am.copy()
        am2[u, v] = am2[v, u] = 0
        adj2 = [list(map(int, np.flatnonzero(am2[w]))) for w in range(n)]
        if not all(adj2):
            continue
        from perclab.graphs import bfs_depths
        indptr = np.cumsum([0] + [len(rw) for rw in adj2])
        flat = np.asarray([x for rw in adj2 for x in rw], dtype=np.int64)
        if bfs_depths(np.asarray(indptr, dtype=np.int64), flat, 0)[n - 1] < 0:
            after = np.inf
        else:
            after = effective_resistance(
                GraphSample.from_adjacency(adj2, 0, n), 0, [n - 1]).r_eff
        if after < before - 1e-9:
            rayleigh_bad += 1
        cases += 1
    details.append(f"Rayleigh violations {rayleigh_bad}/100")

    # (g) fit_exponent recovers planted slopes within 2 stderr
    # (with a correctly specified noise model 2-sigma coverage is ~95%,
    #  so demand >= 93/100 inside 2 stderr and all inside 4)
    rng = np.random.default_rng(909)
    inside2 = 0
    inside4 = 0
    for _ in range(100):
        slope = rng.uniform(-3, 3)
        scales = np.logspace(0.5, 3.5, 10)
        rel = rng.uniform(0.005, 0.03)
        vals = scales ** slope * np.exp(rel * rng.standard_normal(10))
        est = fit_exponent([(s, v, v * rel) for s, v in zip(scales, vals)])
        dev = abs(est.slope - slope) / est.stderr_slope
        inside2 += dev <= 2
        inside4 += dev <= 4
    details.append(f"planted-slope coverage {inside2}/100 in 2se")

    ok = (mismatches == 0 and worst <= 1e-9 and commute_ok
          and cons_worst <= 1e-12 and mono_ok and rayleigh_bad == 0
          and inside2 >= 93 and inside4 == 100)
    assert report(9, ok, "; ".join(details))


def test_criterion_10_pc_calibration():
    tree_est = estimate_pc(ELL3, r_probe=16, trials=100000, seed=610)
    d2_est = estimate_pc(LatticeSpec(d=2), r_probe=512, trials=8000,
                         seed=611, workers=WORKERS)
    ok = abs(tree_est.p_hat - 0.5) < 0.01 and abs(d2_est.p_hat - 0.5) < 0.01
    assert report(10, ok,
                  f"tree emulation p_hat {tree_est.p_hat:.4f} "
                  f"(|err| {abs(tree_est.p_hat - 0.5):.4f} < 0.01); "
                  f"d=2 p_hat {d2_est.p_hat:.4f} "
                  f"(|err| {abs(d2_est.p_hat - 0.5):.4f} < 0.01)")
