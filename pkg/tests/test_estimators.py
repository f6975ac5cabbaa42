import numpy as np
import pytest

from perclab.estimators import (FitPolicy, PcBracketError, cluster_tail_probe,
                                estimate_pc, fit_exponent, j_lambda_frequency,
                                lattice_ball_curves, shell_trend,
                                tree_ball_curves, triangle_sum_probe,
                                two_point_probe, volume_recursion_check)
from perclab.lattice import LatticeSpec
from perclab.tree import TreeSpec, sample_kesten_tree


def test_fit_exact_power_law():
    pts = [(s, s ** 2) for s in (1, 2, 4, 8, 16, 32)]
    est = fit_exponent(pts)
    assert est.slope == pytest.approx(2.0, abs=1e-12)
    assert est.stderr_slope == pytest.approx(0.0, abs=1e-10)
    assert est.fit_range == (1.0, 32.0)


def test_fit_constant_curve():
    pts = [(s, 7.5) for s in (1, 2, 4, 8)]
    est = fit_exponent(pts)
    assert est.slope == pytest.approx(0.0, abs=1e-12)


def test_fit_noisy_synthetic():
    rng = np.random.default_rng(0)
    scales = np.logspace(0, 3, 12)
    vals = scales ** 1.5 * (1 + 0.01 * rng.standard_normal(12))
    est = fit_exponent([(s, v) for s, v in zip(scales, vals)])
    assert abs(est.slope - 1.5) < 0.05


def test_fit_planted_slopes_weighted():
    rng = np.random.default_rng(42)
    misses = 0
    for _ in range(30):
        slope = rng.uniform(-3, 3)
        scales = np.logspace(0.5, 3.5, 10)
        rel = rng.uniform(0.005, 0.03)
        vals = scales ** slope * np.exp(rel * rng.standard_normal(10))
        pts = [(s, v, v * rel) for s, v in zip(scales, vals)]
        est = fit_exponent(pts)
        if abs(est.slope - slope) > 2 * est.stderr_slope:
            misses += 1
    # 2-sigma coverage: ~95%; allow a few misses out of 30
    assert misses <= 5


def test_fit_policy_filters_and_validates():
    pts = [(s, s ** 2) for s in (1, 2, 4, 8, 16)]
    est = fit_exponent(pts, FitPolicy(min_scale=2, max_scale=16,
                                      policy_id="clip"))
    assert est.fit_range == (2.0, 16.0)
    assert est.policy_id == "clip"
    with pytest.raises(ValueError):
        fit_exponent(pts[:3])
    with pytest.raises(ValueError):
        fit_exponent([(1, 1), (2, 0.0), (4, 2), (8, 3)])


def test_estimate_pc_tree_emulation():
    est = estimate_pc(TreeSpec(3), r_probe=16, trials=40000, seed=5)
    assert abs(est.p_hat - 0.5) < 0.01
    assert est.uncertainty > 0
    assert est.scales == (16, 32)


def test_estimate_pc_bracket_failure():
    with pytest.raises(PcBracketError):
        estimate_pc(TreeSpec(3), r_probe=16, trials=5000, seed=6,
                    bracket=(0.7, 0.9))


def test_two_point_extremes():
    spec0 = LatticeSpec(d=2, p=0.0)
    spec1 = LatticeSpec(d=2, p=1.0)
    xs = [(1, 0), (2, 0), (3, 0)]
    c0 = two_point_probe(spec0, xs, trials=200, seed=7)
    c1 = two_point_probe(spec1, xs, trials=200, seed=7)
    assert np.all(c0.p_hat == 0.0)
    assert np.all(c1.p_hat == 1.0)
    assert c0.capped == 0


def test_shell_trend_arithmetic():
    # mean-field decay in d=7 converges, synthetic d=5 exponent diverges
    _r, inc7, _p = shell_trend(7, -5.0, 1.0, 64)
    assert all(b < a for a, b in zip(inc7, inc7[1:]))
    _r, inc5, _p = shell_trend(5, -3.0, 1.0, 64)
    assert all(b > a for a, b in zip(inc5, inc5[1:]))


def test_triangle_zero_curve_keeps_origin_term():
    spec = LatticeSpec(d=3, p=0.0)
    rep = triangle_sum_probe(spec, box_radius=8, trials=100, seed=8)
    assert rep.partial_sums == [1.0] * len(rep.shell_radii)
    assert rep.converging


def test_volume_recursion_full_line():
    # p=1, d=1: G(r) = 2r+1 exactly, ratio -> 1 from below
    spec = LatticeSpec(d=1, p=1.0)
    rows = volume_recursion_check(spec, [16, 64], trials=3, seed=9)
    for row in rows:
        g_r = 2 * row.r + 1
        g_2r = 4 * row.r + 1
        assert row.g_r == pytest.approx(g_r, abs=1e-9)
        assert row.ratio == pytest.approx(g_2r * row.r / g_r ** 2, abs=1e-9)
    assert rows[-1].ratio == pytest.approx(1.0, abs=0.02)


def test_volume_recursion_empty_lattice_degenerate():
    spec = LatticeSpec(d=2, p=0.0)
    rows = volume_recursion_check(spec, [8, 32], trials=5, seed=10)
    for row in rows:
        assert row.g_r == 1.0
        assert row.ratio == pytest.approx(row.r)


def test_volume_recursion_tree_band():
    rows = volume_recursion_check(TreeSpec(3), [8, 16, 32, 64], trials=40000,
                                  seed=11)
    ratios = [row.ratio for row in rows]
    assert all(0.5 < x < 3.0 for x in ratios)
    assert max(ratios) / min(ratios) < 2.0


def test_cluster_tail_empty_lattice():
    spec = LatticeSpec(d=2, p=0.0)
    curve = cluster_tail_probe(spec, [1, 10, 100], trials=500, seed=12)
    assert np.all(curve.p_hat == 0.0)


def test_cluster_tail_subcritical_cutoff():
    # subcritical tail decays much faster than the critical n^{-1/2}
    from perclab.tree import gw_cluster_sizes
    crit = cluster_tail_probe(TreeSpec(3), [10, 100], trials=100000, seed=13)
    sizes = gw_cluster_sizes(TreeSpec(3), 0.4, 100000, cap=100, seed=13,
                             root_degree=3)
    p10 = np.mean(sizes > 10)
    p100 = np.mean(sizes > 100)
    crit_ratio = crit.p_hat[1] / crit.p_hat[0]
    sub_ratio = p100 / max(p10, 1e-12)
    assert sub_ratio < 0.2 * crit_ratio


def test_lattice_tree_ball_curve_agreement_trivial():
    # d=1 full line: volumes deterministic
    curves = lattice_ball_curves(LatticeSpec(d=1, p=1.0), 8, 4, seed=14)
    vol, se = curves.volume(8)
    assert vol == pytest.approx(17.0)
    assert se == pytest.approx(0.0, abs=1e-12)
    hp, _ = curves.h_prob(8)
    assert hp == 1.0


def test_tree_ball_curve_moments():
    curves = tree_ball_curves(TreeSpec(3), 0.5, 16, 50000, seed=15)
    # E|B(0,r)| = 1 + 1.5 r for the rooted 3-regular tree at criticality
    for r in (4, 16):
        vol, se = curves.volume(r)
        assert abs(vol - (1 + 1.5 * r)) < 4 * se


def test_j_lambda_monotone_in_lambda():
    spec = TreeSpec(3)

    def sampler(R, seed):
        return sample_kesten_tree(spec, R, seed)

    table = j_lambda_frequency(sampler, [8, 16], [1.0, 2.0, 4.0, 16.0],
                               samples=50, seed=16)
    for i in range(len(table.r_list)):
        row = table.freq[i]
        assert np.all(np.diff(row) >= 0)
    assert table.frequency(16, 1.0) <= 0.1       # |B| = r^2 exactly: rare
    assert table.frequency(16, 16.0) >= table.frequency(16, 2.0)
    assert table.frequency(16, 16.0) > 0.5
