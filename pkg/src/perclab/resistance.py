"""Electric networks on graph samples: unit conductance per edge.

``effective_resistance`` solves the potential problem (potential 1 at the
source, 0 on the target set, current conserved elsewhere) with conjugate
gradients on the grounded Laplacian, diagonally preconditioned; the target
set is contracted to a super-node by construction, which keeps the system
symmetric positive definite.  Reported resistance is 1 / (current out of
the source).  Disconnection is encoded as +inf.

``nash_williams_bound`` turns the level structure of a ball into the
classical cut-set lower bound: the open edges between consecutive boundary
levels are disjoint cut-sets separating the origin from the boundary, so
R_eff >= sum_j 1/|Pi_j|.

A level-j cut edge is a *lane* for radius r when a path starting with it
can reach level r without revisiting level j-1; levels with few lanes force
high resistance through the cut-set bound.  ``lane_report`` counts lanes
with one reverse-reachability sweep per level, O(levels * edges) total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .graphs import GraphSample, from_intrinsic_ball

EXACT_SOLVE = "exact_solve"
NW_BOUND = "nash_williams_bound"


class SolverFailure(RuntimeError):
    """The iterative solve did not reach the requested residual."""


@dataclass
class ResistanceResult:
    r_eff: float
    method: str
    residual: float
    source: int
    targets: str


@dataclass
class LaneReport:
    r: int
    levels: list          # the js in [r/4, r/2]
    counts: list          # lanes per level

    def lane_rich(self, lam: int) -> bool:
        """More than half of the window levels have at least ``lam`` lanes."""
        rich = sum(1 for c in self.counts if c >= lam)
        return rich * 2 > len(self.counts)

    def total(self) -> int:
        return int(sum(self.counts))


@dataclass
class CommuteCheck:
    mc_mean: float
    exact: float
    ratio: float
    ci_low: float
    ci_high: float
    trials: int


def _adjacency(g: GraphSample) -> sp.csr_matrix:
    data = np.ones(len(g.indices), dtype=np.float64)
    return sp.csr_matrix((data, g.indices, g.indptr), shape=(g.n, g.n))


def effective_resistance(g: GraphSample, source: int, targets,
                         rtol: float = 1e-10,
                         maxiter: int | None = None) -> ResistanceResult:
    """Effective resistance between ``source`` and the set ``targets``.

    Raises :class:`SolverFailure` if conjugate gradients cannot reach the
    requested relative residual -- never returns a silent wrong answer.
    """
    targets = np.asarray(list(targets), dtype=np.int64)
    descr = f"set(n={len(targets)})"
    if len(targets) == 0:
        return ResistanceResult(np.inf, EXACT_SOLVE, 0.0, source, "empty")
    if np.any(targets == source):
        raise ValueError("source belongs to the target set")

    A = _adjacency(g)
    n = g.n
    from .graphs import bfs_depths
    comp = bfs_depths(g.indptr, g.indices, source)
    if not np.any(comp[targets] >= 0):
        return ResistanceResult(np.inf, EXACT_SOLVE, 0.0, source, descr)

    is_target = np.zeros(n, dtype=bool)
    is_target[targets] = True
    # unknown potentials: non-target vertices in the source's component
    unknown = np.flatnonzero(~is_target & (comp >= 0) & (np.arange(n) != source))

    deg = np.diff(g.indptr).astype(np.float64)
    rel = 0.0
    phi = np.zeros(0)
    if unknown.size:
        sub = A[unknown][:, unknown]
        L = (sp.diags(deg[unknown]) - sub).tocsr()
        b = np.asarray(A[unknown][:, [source]].todense()).ravel()
        bnorm = np.linalg.norm(b)

        def relres(x):
            res = np.linalg.norm(L @ x - b)
            return res / bnorm if bnorm > 0 else res

        # sparse Cholesky-style factorization first: the grounded Laplacian
        # of a near-tree sample factors with negligible fill, orders of
        # magnitude faster than Krylov on these long-diameter graphs
        phi = None
        try:
            phi = spla.splu(L.tocsc()).solve(b)
            rel = relres(phi)
        except RuntimeError:
            phi = None
        if phi is None or rel > rtol:
            dinv = 1.0 / L.diagonal()
            M = spla.LinearOperator(L.shape, matvec=lambda x: dinv * x)
            if maxiter is None:
                maxiter = max(20000, 40 * len(unknown))
            phi, info = spla.cg(L, b, rtol=min(rtol * 1e-2, 1e-12), atol=0.0,
                                maxiter=maxiter, M=M)
            rel = relres(phi)
            if rel > rtol:
                raise SolverFailure(
                    f"linear solve stalled: relative residual {rel:.3e} "
                    f"> {rtol:.1e} (cg info={info})")

    pot = np.zeros(n)
    pot[source] = 1.0
    if unknown.size:
        pot[unknown] = phi
    nbrs = g.neighbors(source)
    current = float(np.sum(1.0 - pot[nbrs]))
    if current <= 0:
        return ResistanceResult(np.inf, EXACT_SOLVE, rel, source, descr)
    return ResistanceResult(1.0 / current, EXACT_SOLVE, rel, source, descr)


def resistance_to_level(g: GraphSample, r: int, **kw) -> ResistanceResult:
    """R_eff(origin, dB(0, r)); +inf when the boundary level is empty."""
    targets = g.level(r)
    res = effective_resistance(g, g.origin, targets, **kw)
    return ResistanceResult(res.r_eff, res.method, res.residual, res.source,
                            f"level_{r}")


def _levels_and_cuts(obj, r: int):
    """(level vertex counts, edges between consecutive levels) for j=0..r."""
    if isinstance(obj, GraphSample):
        depth = obj.depth
        sizes = np.bincount(depth[depth <= r], minlength=r + 1)
        edges = obj.edge_list()
        lo = np.minimum(depth[edges[:, 0]], depth[edges[:, 1]])
        hi = np.maximum(depth[edges[:, 0]], depth[edges[:, 1]])
        cross = (hi == lo + 1) & (hi <= r)
        cuts = np.bincount(hi[cross], minlength=r + 1)
        return sizes, cuts
    # IntrinsicBall
    sizes = np.zeros(r + 1, dtype=np.int64)
    for j, lv in enumerate(obj.levels[:r + 1]):
        sizes[j] = len(lv)
    cuts = np.zeros(r + 1, dtype=np.int64)
    dist = obj.dist
    for (u, v) in obj.open_edges:
        du, dv = dist[u], dist[v]
        if abs(du - dv) == 1:
            j = max(du, dv)
            if j <= r:
                cuts[j] += 1
    return sizes, cuts


def nash_williams_bound(obj, r: int | None = None) -> ResistanceResult:
    """Cut-set lower bound on R_eff(origin, dB(0, r)) from level cut-sets."""
    if r is None:
        r = obj.truncation_radius if isinstance(obj, GraphSample) else obj.radius
    sizes, cuts = _levels_and_cuts(obj, r)
    if sizes[r] == 0:
        return ResistanceResult(np.inf, NW_BOUND, 0.0, 0, f"level_{r}")
    total = 0.0
    for j in range(1, r + 1):
        if cuts[j] == 0:
            return ResistanceResult(np.inf, NW_BOUND, 0.0, 0, f"level_{r}")
        total += 1.0 / cuts[j]
    return ResistanceResult(total, NW_BOUND, 0.0, 0, f"level_{r}")


def lane_report(obj, r: int) -> LaneReport:
    """Lane counts per level j in [r/4, r/2] for the one-arm radius r."""
    g = obj if isinstance(obj, GraphSample) else from_intrinsic_ball(obj)
    j_lo = max(1, int(np.ceil(r / 4)))
    j_hi = int(np.floor(r / 2))
    js = list(range(j_lo, j_hi + 1))
    if not js:
        return LaneReport(r=r, levels=[], counts=[])
    counts = _kernels.lane_counts(g.indptr, g.indices, g.depth, r, j_lo, j_hi)
    return LaneReport(r=r, levels=js, counts=[int(c) for c in counts])


def commute_time_check(g: GraphSample, x: int, y: int, walk_trials: int,
                       seed: int) -> CommuteCheck:
    """Monte Carlo commute time x->y->x against 2 * R_eff(x,y) * |E|."""
    res = effective_resistance(g, x, [y])
    exact = 2.0 * res.r_eff * g.n_edges
    steps = _kernels.commute_batch(g.indptr, g.indices, x, y, walk_trials, seed)
    mean = float(steps.mean())
    se = float(steps.std(ddof=1) / np.sqrt(walk_trials)) if walk_trials > 1 else 0.0
    ratio = mean / exact
    return CommuteCheck(mc_mean=mean, exact=exact, ratio=ratio,
                        ci_low=(mean - 1.96 * se) / exact,
                        ci_high=(mean + 1.96 * se) / exact,
                        trials=walk_trials)
