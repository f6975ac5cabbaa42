"""Exact samplers on the ell-regular tree: critical clusters and their
size-biased limit.

On the ell-regular tree, critical percolation has p_c = 1/(ell-1) and the
cluster of the root is a Galton-Watson tree whose non-root offspring law is
Binomial(ell-1, p_c), mean exactly one.  Conditioning the cluster to be
infinite yields the size-biased tree: an infinite spine where every spine
vertex draws its child count from the size-biased offspring law (one child
continues the spine, the rest root independent critical bushes).  All the
exponents this package estimates are rigorously known here, which makes the
tree the calibration ground for every estimator before lattice runs.

Two access paths are provided:

* full samplers (:func:`sample_kesten_tree`, :func:`sample_critical_gw`)
  that realize the graph structure as a :class:`~perclab.graphs.GraphSample`
  for the walk and resistance engines;
* vectorized level-size recursions (:func:`kesten_level_sizes`,
  :func:`gw_level_sizes`, :func:`gw_cluster_sizes`) that sample only the
  per-depth counts -- the same Markov recursion the full sampler induces --
  for volume, one-arm, and cluster-tail statistics at scale.

Size-biasing a Binomial(m, q) gives 1 + Binomial(m-1, q); the samplers use
inverse-CDF lookup on the explicit (<= ell+1)-point law, and the recursions
use the algebraic identity.  A test pins the two against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .graphs import GraphSample


@dataclass(frozen=True)
class TreeSpec:
    """ell-regular tree; vertex degree ell >= 3."""

    ell: int

    def __post_init__(self):
        if self.ell < 3:
            raise ValueError(f"regular tree degree must be >= 3, got {self.ell}")

    @property
    def p_c(self) -> float:
        return 1.0 / (self.ell - 1)

    @property
    def offspring_variance(self) -> float:
        """Variance of the critical non-root offspring law Binomial(ell-1, p_c)."""
        return 1.0 - self.p_c


def offspring_pmf(m: int, q: float) -> np.ndarray:
    """Binomial(m, q) pmf on 0..m."""
    return binom.pmf(np.arange(m + 1), m, q)


def size_biased_pmf(pmf: np.ndarray) -> np.ndarray:
    """P(N^ = j) proportional to j * P(N = j)."""
    j = np.arange(len(pmf))
    w = j * pmf
    return w / w.sum()


class _InverseCdfSampler:
    """Inverse-CDF sampling from a small fixed pmf, one uniform per draw."""

    def __init__(self, pmf: np.ndarray):
        cdf = np.cumsum(pmf)
        cdf[-1] = 1.0
        self.cdf = cdf

    def draw(self, u: float) -> int:
        return int(np.searchsorted(self.cdf, u, side="right"))


class _UniformStream:
    def __init__(self, gen: np.random.Generator, chunk: int = 8192):
        self.gen = gen
        self.chunk = chunk
        self.buf = gen.random(chunk)
        self.i = 0

    def next(self) -> float:
        if self.i == self.chunk:
            self.buf = self.gen.random(self.chunk)
            self.i = 0
        u = self.buf[self.i]
        self.i += 1
        return u


def _grow_bushes(queue: list, depth: list, edges: list, R: int,
                 child_sampler: _InverseCdfSampler, us: _UniformStream):
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        dv = depth[v]
        if dv >= R:
            continue
        for _ in range(child_sampler.draw(us.next())):
            w = len(depth)
            depth.append(dv + 1)
            edges.append((v, w))
            queue.append(w)


def sample_kesten_tree(spec: TreeSpec, R: int, seed: int) -> GraphSample:
    """Size-biased critical tree truncated at depth R.

    A spine of length R from the origin; the origin draws its child count
    from size-biased Binomial(ell, p_c), interior spine vertices from
    size-biased Binomial(ell-1, p_c); one child continues the spine and the
    rest root independent critical bushes, everything truncated at total
    depth R.
    """
    if R < 1:
        raise ValueError("truncation depth must be >= 1")
    gen = np.random.default_rng(int(seed) & (2**64 - 1))
    us = _UniformStream(gen)
    q = spec.p_c
    sb_root = _InverseCdfSampler(size_biased_pmf(offspring_pmf(spec.ell, q)))
    sb_inner = _InverseCdfSampler(size_biased_pmf(offspring_pmf(spec.ell - 1, q)))
    bush_child = _InverseCdfSampler(offspring_pmf(spec.ell - 1, q))

    depth = [0]
    edges = []
    bush_queue = []
    spine = 0
    for k in range(R):
        nhat = (sb_root if k == 0 else sb_inner).draw(us.next())
        child_depth = k + 1
        spine_child = len(depth)
        depth.append(child_depth)
        edges.append((spine, spine_child))
        for _ in range(nhat - 1):
            w = len(depth)
            depth.append(child_depth)
            edges.append((spine, w))
            bush_queue.append(w)
        spine = spine_child
    _grow_bushes(bush_queue, depth, edges, R, bush_child, us)
    return GraphSample.from_edges(len(depth), edges, 0, R)


def sample_critical_gw(spec: TreeSpec, R: int, seed: int) -> GraphSample:
    """Unconditioned critical Galton-Watson tree truncated at depth R.

    Offspring law Binomial(ell-1, p_c) at every vertex including the root;
    extinct by depth R with probability tending to one.
    """
    if R < 1:
        raise ValueError("truncation depth must be >= 1")
    gen = np.random.default_rng(int(seed) & (2**64 - 1))
    us = _UniformStream(gen)
    child = _InverseCdfSampler(offspring_pmf(spec.ell - 1, spec.p_c))
    depth = [0]
    edges = []
    _grow_bushes([0], depth, edges, R, child, us)
    return GraphSample.from_edges(len(depth), edges, 0, R)


# ---------------------------------------------------------------------------
# vectorized level-size recursions (counts only, no graph structure)
# ---------------------------------------------------------------------------

def kesten_level_sizes(spec: TreeSpec, R: int, samples: int,
                       seed: int) -> np.ndarray:
    """Level sizes |dB(0, k)| of independent size-biased trees.

    Returns an (samples, R+1) int64 array.  Uses the identity that the
    size-biased Binomial(m, q) count equals 1 + Binomial(m-1, q): per depth,
    the spine contributes one vertex plus Binomial(m-1, q) fresh bush roots,
    and existing bush vertices branch critically.
    """
    gen = np.random.default_rng(int(seed) & (2**64 - 1))
    q = spec.p_c
    out = np.empty((samples, R + 1), dtype=np.int64)
    out[:, 0] = 1
    bush = np.zeros(samples, dtype=np.int64)
    for k in range(R):
        m_extra = spec.ell - 1 if k == 0 else spec.ell - 2
        new_roots = gen.binomial(m_extra, q, size=samples)
        bush = gen.binomial(bush * (spec.ell - 1), q) + new_roots
        out[:, k + 1] = 1 + bush
    return out


def gw_level_sizes(spec: TreeSpec, p: float, R: int, samples: int, seed: int,
                   root_degree: int | None = None) -> np.ndarray:
    """Level sizes of Galton-Watson trees with retention p, (samples, R+1).

    ``root_degree`` defaults to ell-1 (plain branching process); pass
    ``spec.ell`` for honest exploration of the rooted regular tree.
    """
    gen = np.random.default_rng(int(seed) & (2**64 - 1))
    m_root = (spec.ell - 1) if root_degree is None else root_degree
    out = np.empty((samples, R + 1), dtype=np.int64)
    out[:, 0] = 1
    z = np.ones(samples, dtype=np.int64)
    for k in range(R):
        m = m_root if k == 0 else spec.ell - 1
        z = gen.binomial(z * m, p)
        out[:, k + 1] = z
    return out


def gw_cluster_sizes(spec: TreeSpec, p: float, trials: int, cap: int,
                     seed: int, root_degree: int | None = None) -> np.ndarray:
    """Total progeny per trial, capped: values > cap are reported as cap+1."""
    gen = np.random.default_rng(int(seed) & (2**64 - 1))
    m_root = (spec.ell - 1) if root_degree is None else root_degree
    sizes = np.ones(trials, dtype=np.int64)
    z = np.ones(trials, dtype=np.int64)
    active = np.arange(trials, dtype=np.int64)
    first = True
    while active.size:
        m = m_root if first else spec.ell - 1
        first = False
        z_new = gen.binomial(z * m, p)
        sizes[active] += z_new
        alive = (z_new > 0) & (sizes[active] <= cap)
        over = sizes[active] > cap
        sizes[active[over]] = cap + 1
        active = active[alive]
        z = z_new[alive]
    return sizes


def gw_survival_counts(spec: TreeSpec, p: float, r_list, trials: int,
                       seed: int, root_degree: int | None = None) -> np.ndarray:
    """Number of trials whose branching process is alive at each r in r_list."""
    r_list = sorted(int(r) for r in r_list)
    gen = np.random.default_rng(int(seed) & (2**64 - 1))
    m_root = (spec.ell - 1) if root_degree is None else root_degree
    counts = np.zeros(len(r_list), dtype=np.int64)
    alive_n = trials
    z = np.ones(trials, dtype=np.int64)
    k = 0
    for i, r in enumerate(r_list):
        while k < r and z.size:
            m = m_root if k == 0 else spec.ell - 1
            z = gen.binomial(z * m, p)
            z = z[z > 0]
            k += 1
        counts[i] = z.size if r > 0 else alive_n
    return counts
