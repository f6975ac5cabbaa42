import numpy as np
import pytest

from perclab.lattice import LatticeSpec, ResourceLimitError
from perclab.lattice_iic import (sample_iic_ball, sample_iic_two_point,
                                 two_point_cost_guard)
from perclab.rng import derive_seed

# desk-scale criticality estimate for the d=7 nearest-neighbor lattice,
# produced by this package's own crossing estimator (estimate_pc)
P_C_D7 = 0.0787


def test_full_lattice_accepts_first_attempt():
    spec = LatticeSpec(d=2, p=1.0)
    s = sample_iic_ball(spec, r=3, seed=1)
    assert s.attempts == 1
    assert s.graph.max_depth() == 6
    s.graph.validate()


def test_conditioning_event_holds_on_samples():
    spec = LatticeSpec(d=2, p=0.5)  # d=2 criticality, classical value
    for i in range(10):
        s = sample_iic_ball(spec, r=4, seed=derive_seed(2, i))
        assert s.graph.max_depth() == 8        # H(2r) re-verified structurally
        assert s.graph.truncation_radius == 8
        assert s.p == 0.5


def test_attempt_count_scales_like_one_arm_d7():
    spec = LatticeSpec(d=7, p=P_C_D7)
    r = 8
    attempts = [sample_iic_ball(spec, r, seed=derive_seed(3, i)).attempts
                for i in range(40)]
    mean_attempts = np.mean(attempts)
    # expected attempts ~ 1/P(H(2r)) ~ 2r up to the one-arm constant;
    # order-of-magnitude band per the factor-4 contract
    assert 2 * r / 4 <= mean_attempts <= 2 * r * 4


def test_two_point_neighbor_accepts_quickly():
    spec = LatticeSpec(d=2, p=0.5)
    first = sum(
        sample_iic_two_point(spec, (1, 0), seed=derive_seed(4, i)).attempts == 1
        for i in range(60))
    # the direct edge alone is open with probability 1/2
    assert first >= 20


def test_two_point_sample_contains_target():
    spec = LatticeSpec(d=2, p=0.5)
    s = sample_iic_two_point(spec, (2, 1), seed=9)
    g = s.graph
    g.validate()
    assert g.n >= 2
    assert g.depth.max() >= 3 or g.n >= 4  # connects 0 to (2,1): >= 3 edges


def test_two_point_acceptance_rate_d7():
    # acceptance rate within an order of magnitude of |x|^{2-d} = 4^{-5}
    spec = LatticeSpec(d=7, p=P_C_D7)
    attempts = [sample_iic_two_point(spec, (4, 0, 0, 0, 0, 0, 0),
                                     seed=derive_seed(5, i),
                                     max_attempts=400000).attempts
                for i in range(5)]
    rate = 1.0 / np.mean(attempts)
    target = 4.0 ** (-5)
    assert target / 10 <= rate <= target * 10


def test_two_point_conditional_volume_bounded():
    # E[|B(0,r)| on conditioned samples] stays O(r^2)
    spec = LatticeSpec(d=7, p=P_C_D7)
    x = (3, 0, 0, 0, 0, 0, 0)
    ratios = {2: [], 4: []}
    for i in range(12):
        s = sample_iic_two_point(spec, x, seed=derive_seed(6, i),
                                 max_attempts=400000)
        counts = np.bincount(s.graph.depth, minlength=8)
        vol = np.cumsum(counts)
        for r in ratios:
            ratios[r].append(vol[r] / r ** 2)
    for r, vals in ratios.items():
        assert np.mean(vals) < 50


def test_cost_guard_rejects_far_targets():
    spec = LatticeSpec(d=7, p=P_C_D7)
    with pytest.raises(ResourceLimitError):
        two_point_cost_guard(spec, (1000, 0, 0, 0, 0, 0, 0), 1e6)
    with pytest.raises(ResourceLimitError):
        sample_iic_two_point(spec, (64, 0, 0, 0, 0, 0, 0), seed=1,
                             max_attempts=1000)


def test_exhausted_attempts_raise():
    spec = LatticeSpec(d=2, p=0.05)   # deep subcritical: H(2r) essentially never
    with pytest.raises(RuntimeError):
        sample_iic_ball(spec, r=12, seed=3, max_attempts=64)


def test_invalid_inputs():
    spec = LatticeSpec(d=2, p=0.5)
    with pytest.raises(ValueError):
        sample_iic_ball(spec, r=0, seed=1)
    with pytest.raises(ValueError):
        sample_iic_two_point(spec, (0, 0), seed=1)
