"""perclab: a simulation laboratory for critical percolation geometry.

Materializes the objects of mean-field critical percolation -- intrinsic
metric balls, incipient-cluster samples on trees and lattices, electric
networks on clusters, random walks on samples -- and measures the critical
exponents governing them (ball volume, one-arm decay, effective resistance,
return probability, hitting times, walk range) at desk scale.
"""

__version__ = "0.1.0"

from .cluster import (BUDGET_EXCEEDED, EXCEEDS_CAP, IntrinsicBall,
                      cluster_size_capped, explore_ball, h_event)
from .estimators import (ExponentEstimate, FitPolicy, PcEstimate,
                         cluster_tail_probe, estimate_pc, fit_exponent,
                         j_lambda_frequency, lattice_ball_curves,
                         tree_ball_curves, triangle_sum_probe,
                         two_point_probe, volume_recursion_check)
from .graphs import GraphSample, from_intrinsic_ball
from .lattice import (LatticeSpec, PercolationConfig, canonical_edge,
                      eager_box_config, neighbors)
from .lattice_iic import IICSample, sample_iic_ball, sample_iic_two_point
from .resistance import (LaneReport, ResistanceResult, SolverFailure,
                         commute_time_check, effective_resistance,
                         lane_report, nash_williams_bound,
                         resistance_to_level)
from .rng import derive_seed, mix64
from .tree import TreeSpec, sample_critical_gw, sample_kesten_tree
from .walk import (AnnealedCurve, ReturnCurve, WalkStats,
                   annealed_return_curve, annealed_tau_curve,
                   annealed_range_curve, return_probability_exact,
                   simulate_walk)
