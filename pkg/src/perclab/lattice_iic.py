"""Approximate incipient-cluster samples on Z^d via conditioning.

The incipient infinite cluster is the critical cluster of the origin
conditioned, in a limiting sense, to be infinite.  At desk scale two
finite-volume conditionings stand in for the limit:

* one-arm conditioning -- accept a fresh configuration when the intrinsic
  ball boundary at radius 2r survives, and return B(0, 2r).  Rejection cost
  grows linearly in r (the one-arm probability decays like 1/r), and the
  factor-2 buffer keeps statistics measured within radius r away from the
  conditioning surface;
* two-point conditioning -- accept when the origin connects to a fixed far
  site x (the textbook definition of the limit measure), with rejection
  cost growing like |x|^{d-2}; feasible only for moderate |x|.

Both samplers re-verify the conditioning event on the accepted sample, draw
attempts from disjoint derived-seed streams, and accept the first success
by attempt index (not wall clock), so results are reproducible regardless
of parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cluster import explore_ball
from .graphs import GraphSample, from_intrinsic_ball
from .lattice import LatticeSpec, PercolationConfig, ResourceLimitError
from .rng import derive_seed, derive_seeds


@dataclass
class IICSample:
    """An accepted conditioned sample plus its provenance."""

    graph: GraphSample
    attempts: int
    config_seed: int
    p: float


def sample_iic_ball(spec: LatticeSpec, r: int, seed: int,
                    max_attempts: int = 100000,
                    vertex_budget: int = 10**6,
                    attempt_batch: int = 512) -> IICSample:
    """One-arm-conditioned ball: first configuration with H(2r), as B(0, 2r).

    ``spec.p`` should carry the configured critical-point estimate; the
    sample records it.  Raises :class:`RuntimeError` when ``max_attempts``
    is exhausted (expected attempts grow like 2r / c).
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    rmax = 2 * r
    offsets = spec.offsets_array()
    hw = spec.effective_halfwidth
    attempt = 0
    while attempt < max_attempts:
        batch = min(attempt_batch, max_attempts - attempt)
        seeds = derive_seeds(seed, attempt + batch)[attempt:]
        j = int(_kernels.first_one_arm_hit(seeds, spec.p, offsets, rmax,
                                           vertex_budget, hw))
        if j >= 0:
            cfg_seed = int(seeds[j])
            cfg = PercolationConfig(spec, cfg_seed)
            ball = explore_ball(cfg, tuple([0] * spec.d), rmax,
                                vertex_budget=vertex_budget)
            if not ball.boundary_nonempty(rmax):
                raise AssertionError(
                    "accepted configuration fails its conditioning event")
            g = from_intrinsic_ball(ball)
            return IICSample(graph=g, attempts=attempt + j + 1,
                             config_seed=cfg_seed, p=spec.p)
        attempt += batch
    raise RuntimeError(
        f"one-arm conditioning not achieved in {max_attempts} attempts "
        f"(p={spec.p}, r={r}); is p near criticality?")


def two_point_cost_guard(spec: LatticeSpec, x, max_expected_attempts: float):
    """Reject requests whose rejection cost |x|^{d-2} is clearly infeasible."""
    norm = float(np.linalg.norm(np.asarray(x, dtype=float)))
    est = max(norm, 1.0) ** (spec.d - 2)
    if est > max_expected_attempts:
        raise ResourceLimitError(
            f"two-point conditioning at |x|={norm:.1f} needs ~{est:.2e} "
            f"attempts, above the guard {max_expected_attempts:.2e}")


def sample_iic_two_point(spec: LatticeSpec, x, seed: int,
                         max_attempts: int = 200000,
                         box_radius: int | None = None,
                         cluster_cap: int = 200000,
                         attempt_batch: int = 2048) -> IICSample:
    """Two-point-conditioned sample: first configuration with 0 <-> x.

    Connectivity is decided inside the declared box (paths confined to
    ``[-box_radius, box_radius]^d``, default 4|x|_inf + 4); the cluster of
    the origin restricted to that box is returned.  The cost guard rejects
    far targets up front.
    """
    x = tuple(int(c) for c in x)
    if all(c == 0 for c in x):
        raise ValueError("target must differ from the origin")
    two_point_cost_guard(spec, x, float(max_attempts) * 10)
    if box_radius is None:
        box_radius = 4 * max(abs(c) for c in x) + 4
    offsets = spec.offsets_array()
    hw = spec.effective_halfwidth
    if box_radius > hw:
        raise ResourceLimitError("declared box exceeds the working box")
    targets = np.asarray([x], dtype=np.int64)
    attempt = 0
    while attempt < max_attempts:
        batch = min(attempt_batch, max_attempts - attempt)
        seeds = derive_seeds(derive_seed(seed, 1), attempt + batch)[attempt:]
        found, capped = _kernels.reach_targets_batch(
            seeds, spec.p, offsets, targets, box_radius, cluster_cap, hw)
        idx = np.flatnonzero(found[:, 0])
        if idx.size:
            j = int(idx[0])
            cfg_seed = int(seeds[j])
            cfg = PercolationConfig(spec, cfg_seed)
            inside = _box_predicate(box_radius)
            # intrinsic distance to x can exceed any fixed multiple of the
            # box radius (paths wind), so grow the exploration radius until
            # x appears or the in-box cluster is exhausted
            r_explore = 4 * box_radius
            while True:
                ball = explore_ball(cfg, tuple([0] * spec.d), r_explore,
                                    vertex_budget=cluster_cap + 2,
                                    subgraph=inside)
                if x in ball.dist:
                    break
                if ball.partial or ball.reached < r_explore:
                    raise AssertionError(
                        "accepted configuration fails its conditioning event")
                r_explore *= 2
            g = from_intrinsic_ball(ball)
            return IICSample(graph=g, attempts=attempt + j + 1,
                             config_seed=cfg_seed, p=spec.p)
        attempt += batch
    raise RuntimeError(
        f"two-point conditioning 0<->{x} not achieved in {max_attempts} attempts")


def _box_predicate(box_radius: int):
    def inside(v):
        return all(-box_radius <= c <= box_radius for c in v)
    return inside
