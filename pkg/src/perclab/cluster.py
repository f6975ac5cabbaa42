"""Breadth-first exploration of open clusters in the intrinsic metric.

The intrinsic (chemical) distance between sites is the length of the
shortest open path between them.  ``explore_ball`` grows the ball
B(0, r) = {u : dist(0, u) <= r} level by level; the boundary of level r
being nonempty is the one-arm event H(r).

Exploration order is pinned for reproducibility: strict BFS by level,
vertices processed in insertion order, neighbors enumerated in the spec's
fixed lexicographic offset order.  The compiled kernels in
:mod:`perclab._kernels` follow the identical discipline, so structural
results agree exactly between the two paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import (BoxOverflowError, LatticeSpec, PercolationConfig,
                      canonical_edge, neighbors)

BUDGET_EXCEEDED = "budget_exceeded"
EXCEEDS_CAP = "exceeds_cap"


@dataclass
class IntrinsicBall:
    """The explored open cluster of ``origin`` out to intrinsic radius ``radius``.

    ``levels[j]`` is the boundary set at distance exactly j; ``dist`` maps
    every ball vertex to its distance; ``open_edges`` holds every explored
    open edge with both endpoints in the ball (all open edges incident to
    B(0, r-1) have been queried).  ``partial`` marks a budget-truncated
    exploration, unusable for unbiased statistics.
    """

    origin: tuple
    radius: int
    levels: list
    dist: dict
    open_edges: set
    partial: bool = False
    explored: int = 0

    @property
    def reached(self) -> int:
        """Largest j with a nonempty boundary level."""
        for j in range(len(self.levels) - 1, -1, -1):
            if self.levels[j]:
                return j
        return 0

    def boundary_nonempty(self, j: int) -> bool:
        return j < len(self.levels) and len(self.levels[j]) > 0

    def level_sizes(self) -> list:
        return [len(lv) for lv in self.levels]

    def volume(self, j: int | None = None) -> int:
        """|B(0, j)| (defaults to the full explored radius)."""
        if j is None:
            j = self.radius
        return sum(len(lv) for lv in self.levels[:j + 1])

    def cut_set(self, j: int) -> set:
        """Open edges between levels j-1 and j (a cut separating 0 from level >= j)."""
        if j < 1:
            raise ValueError("cut sets are defined for j >= 1")
        upper = set(self.levels[j]) if j < len(self.levels) else set()
        lower = set(self.levels[j - 1])
        return {e for e in self.open_edges
                if (e[0] in lower and e[1] in upper) or (e[1] in lower and e[0] in upper)}


@dataclass
class ClusterStats:
    """Per-radius summary of an explored ball."""

    level_sizes: list
    ball_volume: list = field(init=False)
    reached: int = field(init=False)
    cluster_size: object = None  # exact |C(0)| or EXCEEDS_CAP-style marker

    def __post_init__(self):
        vols = []
        acc = 0
        for s in self.level_sizes:
            acc += s
            vols.append(acc)
        self.ball_volume = vols
        self.reached = max((j for j, s in enumerate(self.level_sizes) if s > 0),
                           default=0)


def explore_ball(cfg: PercolationConfig, origin: tuple, r: int,
                 vertex_budget: int = 10**6,
                 subgraph=None) -> IntrinsicBall:
    """Exact BFS ball of radius ``r`` in the open subgraph.

    ``subgraph``, if given, is a vertex predicate restricting exploration to
    a fixed deterministic subgraph (e.g. a half-space); percolation still
    uses the full-lattice retention probability.

    Raises :class:`BoxOverflowError` if exploration leaves the working box.
    Exceeding ``vertex_budget`` stops exploration and flags the result
    partial rather than raising.
    """
    if r < 0:
        raise ValueError("radius must be >= 0")
    if vertex_budget <= 0:
        raise ValueError("vertex_budget must be positive")
    spec = cfg.spec
    if not spec.in_box(origin):
        raise BoxOverflowError(f"origin {origin} outside working box")
    if subgraph is not None and not subgraph(origin):
        raise ValueError("origin excluded by subgraph predicate")

    dist = {origin: 0}
    levels = [[origin]]
    open_edges = set()
    explored = 1
    partial = False

    for j in range(1, r + 1):
        frontier = []
        for u in levels[j - 1]:
            for w in neighbors(spec, u):
                if subgraph is not None and not subgraph(w):
                    continue
                if not spec.in_box(w):
                    raise BoxOverflowError(
                        f"exploration reached {w}, outside working box "
                        f"(half-width {spec.effective_halfwidth})")
                if not cfg.edge_state(u, w):
                    continue
                seen = w in dist
                if seen:
                    if dist[w] <= j:
                        open_edges.add(canonical_edge(u, w))
                    continue
                if explored >= vertex_budget:
                    partial = True
                    break
                dist[w] = j
                frontier.append(w)
                explored += 1
                open_edges.add(canonical_edge(u, w))
            if partial:
                break
        levels.append(frontier)
        if partial or not frontier:
            break
    while len(levels) < r + 1:
        levels.append([])
    return IntrinsicBall(origin=origin, radius=r, levels=levels, dist=dist,
                         open_edges=open_edges, partial=partial,
                         explored=explored)


def h_event(cfg: PercolationConfig, origin: tuple, r: int,
            vertex_budget: int = 10**6):
    """One-arm event: does the ball boundary at radius ``r`` survive?

    Returns True / False, or :data:`BUDGET_EXCEEDED` when exploration was
    truncated before the answer was decided.
    """
    ball = explore_ball(cfg, origin, r, vertex_budget)
    if ball.boundary_nonempty(r):
        return True
    if ball.partial:
        return BUDGET_EXCEEDED
    return False


def cluster_size_capped(cfg: PercolationConfig, origin: tuple, cap: int):
    """|C(0)| exactly if <= cap, else :data:`EXCEEDS_CAP`."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    spec = cfg.spec
    if not spec.in_box(origin):
        raise BoxOverflowError(f"origin {origin} outside working box")
    seen = {origin}
    queue = [origin]
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        for w in neighbors(spec, u):
            if not spec.in_box(w):
                raise BoxOverflowError(f"exploration reached {w}, outside working box")
            if w in seen or not cfg.edge_state(u, w):
                continue
            seen.add(w)
            if len(seen) > cap:
                return EXCEEDS_CAP
            queue.append(w)
    return len(seen)


def cluster_stats(ball: IntrinsicBall, cluster_size=None) -> ClusterStats:
    return ClusterStats(level_sizes=ball.level_sizes(), cluster_size=cluster_size)
