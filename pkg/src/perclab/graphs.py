"""Index-compacted finite graphs shared by the walk and resistance engines.

A :class:`GraphSample` is a connected graph in CSR adjacency form with a
distinguished origin, per-vertex intrinsic depth (BFS distance from the
origin), and the truncation radius it was grown to.  Tree samples and
lattice balls both compact to this shape, so downstream code never cares
where a sample came from.

Serialization is a flat adjacency text file::

    n R origin
    <neighbors of vertex 0, space separated>
    ...
    <neighbors of vertex n-1>

which is enough to rebuild the sample exactly (depths are recomputed by BFS
from the origin on load).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class GraphSample:
    indptr: np.ndarray       # int64, len n+1
    indices: np.ndarray      # int64, len 2*edges
    origin: int
    depth: np.ndarray        # int64, len n
    truncation_radius: int

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def degree(self, v: int | None = None):
        if v is None:
            return np.diff(self.indptr)
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def level(self, j: int) -> np.ndarray:
        """Vertex indices at depth exactly j."""
        return np.flatnonzero(self.depth == j)

    def max_depth(self) -> int:
        return int(self.depth.max())

    def edge_list(self) -> np.ndarray:
        """(n_edges, 2) array, each undirected edge once with u < v."""
        u = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        v = self.indices
        keep = u < v
        return np.column_stack([u[keep], v[keep]])

    def validate(self, tree_depths: bool = False):
        """Check structural invariants; raises ValueError on violation."""
        n = self.n
        if self.depth.shape[0] != n:
            raise ValueError("depth length mismatch")
        if self.depth[self.origin] != 0:
            raise ValueError("origin depth must be 0")
        if self.indices.min(initial=0) < 0 or self.indices.max(initial=-1) >= n:
            raise ValueError("neighbor index out of range")
        edges = self.edge_list()
        if len(edges) * 2 != len(self.indices):
            raise ValueError("adjacency not symmetric (or self-loops present)")
        pairs = set(map(tuple, edges))
        for u, v in pairs:
            if (u, v) != tuple(sorted((u, v))):
                raise ValueError("edge list not canonical")
        # symmetry: every directed arc has a partner
        arcs = set()
        for u in range(n):
            for v in self.neighbors(u):
                arcs.add((u, int(v)))
        for (u, v) in arcs:
            if (v, u) not in arcs:
                raise ValueError(f"arc {u}->{v} has no reverse")
        dd = np.abs(self.depth[edges[:, 0]] - self.depth[edges[:, 1]])
        if tree_depths:
            if not np.all(dd == 1):
                raise ValueError("tree edge with |depth difference| != 1")
        elif not np.all(dd <= 1):
            raise ValueError("edge with |depth difference| > 1")
        if self.depth.max(initial=0) > self.truncation_radius:
            raise ValueError("depth exceeds truncation radius")
        # connectivity + depth correctness via BFS from origin
        bfs_depth = bfs_depths(self.indptr, self.indices, self.origin)
        if np.any(bfs_depth < 0):
            raise ValueError("graph not connected")
        if not np.array_equal(bfs_depth, self.depth):
            raise ValueError("stored depths disagree with BFS distances")

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(f"{self.n} {self.truncation_radius} {self.origin}\n")
            for v in range(self.n):
                row = " ".join(str(int(w)) for w in self.neighbors(v))
                fh.write(row + "\n")

    @classmethod
    def load(cls, path) -> "GraphSample":
        with open(path) as fh:
            header = fh.readline().split()
            n, radius, origin = int(header[0]), int(header[1]), int(header[2])
            adj = []
            for _ in range(n):
                line = fh.readline()
                adj.append([int(t) for t in line.split()])
        return cls.from_adjacency(adj, origin, radius)

    @classmethod
    def from_adjacency(cls, adj, origin: int, truncation_radius: int) -> "GraphSample":
        indptr = np.zeros(len(adj) + 1, dtype=np.int64)
        for v, row in enumerate(adj):
            indptr[v + 1] = indptr[v] + len(row)
        indices = np.empty(indptr[-1], dtype=np.int64)
        for v, row in enumerate(adj):
            indices[indptr[v]:indptr[v + 1]] = row
        depth = bfs_depths(indptr, indices, origin)
        return cls(indptr=indptr, indices=indices, origin=origin,
                   depth=depth, truncation_radius=truncation_radius)

    @classmethod
    def from_edges(cls, n: int, edges, origin: int,
                   truncation_radius: int) -> "GraphSample":
        deg = np.zeros(n, dtype=np.int64)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        fill = indptr[:-1].copy()
        indices = np.empty(indptr[-1], dtype=np.int64)
        for u, v in edges:
            indices[fill[u]] = v
            fill[u] += 1
            indices[fill[v]] = u
            fill[v] += 1
        depth = bfs_depths(indptr, indices, origin)
        return cls(indptr=indptr, indices=indices, origin=origin,
                   depth=depth, truncation_radius=truncation_radius)


def bfs_depths(indptr: np.ndarray, indices: np.ndarray, origin: int) -> np.ndarray:
    """BFS distances from origin; -1 for unreachable vertices."""
    n = len(indptr) - 1
    depth = np.full(n, -1, dtype=np.int64)
    depth[origin] = 0
    frontier = np.array([origin], dtype=np.int64)
    d = 0
    while frontier.size:
        d += 1
        nbrs = _gather_neighbors(indptr, indices, frontier)
        nbrs = nbrs[depth[nbrs] < 0]
        if nbrs.size:
            nbrs = np.unique(nbrs)
            depth[nbrs] = d
        frontier = nbrs
    return depth


def _gather_neighbors(indptr, indices, frontier) -> np.ndarray:
    if frontier.size == 0:
        return frontier
    chunks = [indices[indptr[v]:indptr[v + 1]] for v in frontier]
    return np.concatenate(chunks) if chunks else frontier


def from_intrinsic_ball(ball) -> GraphSample:
    """Compact an explored :class:`~perclab.cluster.IntrinsicBall` to indices."""
    order = [v for level in ball.levels for v in level]
    index = {v: i for i, v in enumerate(order)}
    edges = [(index[u], index[v]) for (u, v) in sorted(ball.open_edges)]
    g = GraphSample.from_edges(len(order), edges, index[ball.origin], ball.radius)
    return g
