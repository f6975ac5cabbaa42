"""Independent brute-force oracles the test suite checks the package against.

Everything here is deliberately written from scratch against the raw
definitions (explicit BFS over a materialized edge table, dense linear
algebra, naive tree recursion) and must not import the implementation
modules it is used to check, beyond plain data containers.
"""

import math
from collections import deque

import numpy as np


def bfs_ball_over_table(table: dict, origin, r: int):
    """BFS ball of radius r over an explicit {edge: open} table.

    Returns (levels, dist, open_edges) in the same shape as IntrinsicBall:
    levels is a list of vertex lists, dist a dict, open_edges a set of
    canonical (sorted) endpoint pairs whose lower endpoint lies at distance
    <= r-1.
    """
    adj = {}
    for (u, v), is_open in table.items():
        if is_open:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
    dist = {origin: 0}
    levels = [[origin]]
    open_edges = set()
    frontier = [origin]
    for j in range(1, r + 1):
        nxt = []
        for u in frontier:
            for w in adj.get(u, ()):  # noqa: B905
                e = (u, w) if u <= w else (w, u)
                if w in dist:
                    if dist[w] <= j:
                        open_edges.add(e)
                    continue
                dist[w] = j
                nxt.append(w)
                open_edges.add(e)
        levels.append(nxt)
        frontier = nxt
    while len(levels) < r + 1:
        levels.append([])
    return levels, dist, open_edges


def dense_effective_resistance(adj_matrix: np.ndarray, source: int, targets):
    """Unit-conductance effective resistance by full Gaussian elimination."""
    n = adj_matrix.shape[0]
    targets = set(int(t) for t in targets)
    deg = adj_matrix.sum(axis=1)
    L = np.diag(deg.astype(float)) - adj_matrix
    unknown = [v for v in range(n) if v != source and v not in targets]
    pot = np.zeros(n)
    pot[source] = 1.0
    if unknown:
        Luu = L[np.ix_(unknown, unknown)]
        b = adj_matrix[unknown, source].astype(float)
        sol = np.linalg.solve(Luu, b)
        for i, v in enumerate(unknown):
            pot[v] = sol[i]
    current = float(np.dot(adj_matrix[source], 1.0 - pot))
    return 1.0 / current


def dense_return_probabilities(adj_lists, origin: int, n_values):
    """p_{2n}(origin, origin) via dense powers of the transition matrix."""
    n = len(adj_lists)
    P = np.zeros((n, n))
    for u, row in enumerate(adj_lists):
        for v in row:
            P[u, v] += 1.0 / len(row)
    out = []
    M = np.linalg.matrix_power(P, 2)
    acc = np.eye(n)
    want = sorted(int(v) for v in n_values)
    k = 0
    for target in want:
        while k < target:
            acc = acc @ M
            k += 1
        out.append(acc[origin, origin])
    return np.array(out)


def naive_size_biased_tree_level_counts(ell: int, R: int, rng) -> np.ndarray:
    """Vertex count per depth of one size-biased critical tree, sampled by
    the textbook construction (explicit spine, explicit bushes)."""
    q = 1.0 / (ell - 1)
    counts = np.zeros(R + 1, dtype=np.int64)
    counts[0] = 1

    def grow_bush(depth):
        stack = [depth]
        while stack:
            d = stack.pop()
            if d >= R:
                continue
            kids = rng.binomial(ell - 1, q)
            counts[d + 1] += kids
            stack.extend([d + 1] * kids)

    for k in range(R):
        m = ell if k == 0 else ell - 1
        # size-biased binomial: pick by weight j * pmf(j)
        pmf = np.array([math.comb(m, j) * q**j * (1 - q)**(m - j)
                        for j in range(m + 1)])
        w = np.arange(m + 1) * pmf
        nhat = rng.choice(m + 1, p=w / w.sum())
        counts[k + 1] += 1              # spine child
        for _ in range(nhat - 1):
            counts[k + 1] += 1
            grow_bush(k + 1)
    return counts


def random_connected_graph(rng, n_lo=3, n_hi=12, p=0.4):
    """Adjacency lists + matrix of a random connected simple graph."""
    while True:
        n = int(rng.integers(n_lo, n_hi + 1))
        am = (rng.random((n, n)) < p).astype(int)
        am = np.triu(am, 1)
        am = am + am.T
        # connectivity check
        seen = {0}
        dq = deque([0])
        while dq:
            u = dq.popleft()
            for v in np.flatnonzero(am[u]):
                if v not in seen:
                    seen.add(int(v))
                    dq.append(int(v))
        if len(seen) == n and am.sum() > 0:
            adj = [list(map(int, np.flatnonzero(am[v]))) for v in range(n)]
            if all(adj[v] for v in range(n)):
                return adj, am
