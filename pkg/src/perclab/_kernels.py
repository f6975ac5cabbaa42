"""Compiled hot loops: lattice BFS, random walks, distribution iteration.

Everything here is a deterministic function of explicit integer seeds, with
the same keyed mixer as :mod:`perclab.rng`; the pure-Python implementations
in :mod:`perclab.lattice` / :mod:`perclab.cluster` are the reference
semantics and the test suites pin the two paths against each other.

Vertex dedup uses an open-addressing table keyed by the vertex coordinates
packed into two 64-bit limbs ((d+1)//2 axes per limb, 62//axes bits per
axis).  The table is stamped per trial so batch kernels never pay for
clearing.  The packing constrains the working-box half-width; the limit is
mirrored by ``LatticeSpec.effective_halfwidth``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import (EDGE_DOMAIN, WALK_DOMAIN, _G_U, _S11, _absorb_nb,
                  _mix64_nb, _next_state_nb, _uniform_nb)

U64 = np.uint64
I64 = np.int64

_EDGE_DOMAIN_U = U64(EDGE_DOMAIN)
_WALK_DOMAIN_U = U64(WALK_DOMAIN)
_COORD_OFF_I = I64(1) << I64(32)
_S53 = U64(53)

# exploration status codes
STATUS_OK = 0
STATUS_BUDGET = 1
STATUS_BOX = 2
STATUS_CAP = 3


def packing_geometry(d: int) -> tuple:
    """(axes_per_limb, bits_per_axis, halfwidth_limit) for 2-limb vertex keys."""
    axes = (d + 1) // 2
    bits = 62 // axes
    return axes, bits, (1 << (bits - 1)) - 1


@njit(cache=True, inline="always")
def packing_geometry_nb(d):
    axes = (d + 1) // 2
    bits = 62 // axes
    return axes, bits, (I64(1) << I64(bits - 1)) - I64(1)


@njit(cache=True, inline="always")
def _edge_uniform_nb(seed_u, a, b, d):
    st = _mix64_nb((seed_u ^ _EDGE_DOMAIN_U) + _G_U)
    for i in range(d):
        st = _absorb_nb(st, U64(a[i] + _COORD_OFF_I))
    for i in range(d):
        st = _absorb_nb(st, U64(b[i] + _COORD_OFF_I))
    return _uniform_nb(st)


@njit(cache=True, inline="always")
def _lex_leq(a, b, d):
    for i in range(d):
        if a[i] < b[i]:
            return True
        if a[i] > b[i]:
            return False
    return True


@njit(cache=True, inline="always")
def _open_edge(seed_u, p, u, v, d):
    if _lex_leq(u, v, d):
        return _edge_uniform_nb(seed_u, u, v, d) < p
    return _edge_uniform_nb(seed_u, v, u, d) < p


@njit(cache=True, inline="always")
def _pack(v, d, axes, bits, hw):
    lo = I64(0)
    hi = I64(0)
    for i in range(axes):
        if i < d:
            lo = (lo << bits) | (v[i] + hw)
    for i in range(axes, d):
        hi = (hi << bits) | (v[i] + hw)
    return hi, lo


@njit(cache=True, inline="always")
def _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi, lo):
    # returns True if (hi, lo) was newly inserted, False if already present
    h = _mix64_nb(_mix64_nb(U64(hi)) + U64(lo))
    slot = np.int64(h & U64(mask))
    while True:
        if t_stamp[slot] != stamp:
            t_stamp[slot] = stamp
            t_hi[slot] = hi
            t_lo[slot] = lo
            return True
        if t_hi[slot] == hi and t_lo[slot] == lo:
            return False
        slot = (slot + 1) & mask


@njit(cache=True)
def explore_levels(seed, p, offsets, origin, rmax, budget, hw,
                   queue, t_hi, t_lo, t_stamp, stamp):
    """Level-synchronous BFS of the open cluster out to intrinsic radius rmax.

    Returns (level_sizes, status, explored).  ``queue`` is an
    (capacity, d) scratch array; the t_* arrays are the stamped hash table
    (capacity a power of two, len = mask+1).  Budget-exceeded or box-exit
    exploration stops early with the corresponding status.
    """
    d = offsets.shape[1]
    K = offsets.shape[0]
    axes, bits, _lim = packing_geometry_nb(d)
    mask = t_hi.shape[0] - 1
    seed_u = U64(seed)

    level_sizes = np.zeros(rmax + 1, dtype=np.int64)
    hi0, lo0 = _pack(origin, d, axes, bits, hw)
    _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi0, lo0)
    for i in range(d):
        queue[0, i] = origin[i]
    level_sizes[0] = 1
    explored = 1
    lo_ptr = 0
    hi_ptr = 1
    w = np.empty(d, dtype=np.int64)

    for level in range(1, rmax + 1):
        nxt = hi_ptr
        for qi in range(lo_ptr, hi_ptr):
            u = queue[qi]
            for k in range(K):
                ok = True
                for i in range(d):
                    c = u[i] + offsets[k, i]
                    if c > hw or c < -hw:
                        ok = False
                        break
                    w[i] = c
                if not ok:
                    return level_sizes, STATUS_BOX, explored
                if not _open_edge(seed_u, p, u, w, d):
                    continue
                hi_k, lo_k = _pack(w, d, axes, bits, hw)
                if _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi_k, lo_k):
                    if explored >= budget:
                        return level_sizes, STATUS_BUDGET, explored
                    for i in range(d):
                        queue[nxt, i] = w[i]
                    nxt += 1
                    explored += 1
        level_sizes[level] = nxt - hi_ptr
        lo_ptr = hi_ptr
        hi_ptr = nxt
        if lo_ptr == hi_ptr:
            break
    return level_sizes, STATUS_OK, explored


@njit(cache=True)
def ball_curve_batch(seeds, p, offsets, rmax, budget, hw):
    """Shared-sample one-arm and volume statistics over a batch of trials.

    For each seed, explores B(0, rmax) once and accumulates, per radius r:
    hit counts for the one-arm event (boundary at r nonempty) and ball
    volumes |B(0,r)|.  Trials that trip the vertex budget or the working box
    are excluded from the accumulators and counted separately.

    Returns (hits[rmax+1], vol_sum[rmax+1], vol_sumsq[rmax+1], n_ok,
    n_budget, n_box).
    """
    d = offsets.shape[1]
    cap = 1
    while cap < 4 * (budget + 2):
        cap <<= 1
    queue = np.empty((budget + 2, d), dtype=np.int64)
    t_hi = np.empty(cap, dtype=np.int64)
    t_lo = np.empty(cap, dtype=np.int64)
    t_stamp = np.zeros(cap, dtype=np.int64)
    origin = np.zeros(d, dtype=np.int64)

    hits = np.zeros(rmax + 1, dtype=np.int64)
    vol_sum = np.zeros(rmax + 1, dtype=np.float64)
    vol_sumsq = np.zeros(rmax + 1, dtype=np.float64)
    n_ok = 0
    n_budget = 0
    n_box = 0
    for t in range(seeds.shape[0]):
        levels, status, _ex = explore_levels(
            seeds[t], p, offsets, origin, rmax, budget, hw,
            queue, t_hi, t_lo, t_stamp, t + 1)
        if status == STATUS_BUDGET:
            n_budget += 1
            continue
        if status == STATUS_BOX:
            n_box += 1
            continue
        n_ok += 1
        vol = 0.0
        for r in range(rmax + 1):
            if levels[r] > 0:
                hits[r] += 1
            vol += levels[r]
            vol_sum[r] += vol
            vol_sumsq[r] += vol * vol
    return hits, vol_sum, vol_sumsq, n_ok, n_budget, n_box


@njit(cache=True)
def h_pair_batch(seeds, p, offsets, r, budget, hw, edge_range):
    """Counts of the one-arm events H(r) and H(2r) over a batch of trials.

    Robust across the whole retention range: a depth-first probe first
    looks for a cheap certificate (an open-connected vertex with sup norm
    > 2r * edge_range has intrinsic distance > 2r, so both events hold);
    if instead the probe exhausts the cluster, an exact level BFS on the
    small cluster decides both events.  Only the rare middle case (huge
    cluster that stays confined) pays for a full budgeted BFS, and trials
    still undecided there are counted separately.

    Returns (n_h_r, n_h_2r, n_undecided).
    """
    d = offsets.shape[1]
    K = offsets.shape[0]
    axes, bits, _lim = packing_geometry_nb(d)
    rmax = 2 * r
    dfs_budget = 30 * rmax * rmax + 5000
    if dfs_budget > budget:
        dfs_budget = budget
    cap = 1
    while cap < 4 * (budget + 2):
        cap <<= 1
    mask = cap - 1
    queue = np.empty((budget + 2, d), dtype=np.int64)
    t_hi = np.empty(cap, dtype=np.int64)
    t_lo = np.empty(cap, dtype=np.int64)
    t_stamp = np.zeros(cap, dtype=np.int64)
    w = np.empty(d, dtype=np.int64)
    escape_norm = rmax * edge_range
    n_h_r = 0
    n_h_2r = 0
    n_undecided = 0
    stamp = 0

    for t in range(seeds.shape[0]):
        seed_u = U64(seeds[t])
        # phase 1: DFS escape probe (queue used as a stack)
        stamp += 1
        for i in range(d):
            queue[0, i] = 0
        hi0, lo0 = _pack(queue[0], d, axes, bits, hw)
        _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi0, lo0)
        top = 1
        size = 1
        escaped = False
        exhausted = False
        ucur = np.empty(d, dtype=np.int64)
        while True:
            if top == 0:
                exhausted = True
                break
            top -= 1
            for i in range(d):
                ucur[i] = queue[top, i]
            boxfail = False
            for k in range(K):
                ok = True
                for i in range(d):
                    c = ucur[i] + offsets[k, i]
                    if c > hw or c < -hw:
                        boxfail = True
                        ok = False
                        break
                    w[i] = c
                if boxfail:
                    break
                if not _open_edge(seed_u, p, ucur, w, d):
                    continue
                hi_k, lo_k = _pack(w, d, axes, bits, hw)
                if _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi_k, lo_k):
                    nm = 0
                    for i in range(d):
                        a = w[i] if w[i] >= 0 else -w[i]
                        if a > nm:
                            nm = a
                    if nm > escape_norm:
                        escaped = True
                        break
                    size += 1
                    if size > dfs_budget:
                        break
                    for i in range(d):
                        queue[top, i] = w[i]
                    top += 1
            if escaped or boxfail or size > dfs_budget:
                break
        if escaped:
            n_h_r += 1
            n_h_2r += 1
            continue
        # phase 2: exact level BFS (cheap when the DFS exhausted the cluster)
        stamp += 1
        origin = np.zeros(d, dtype=np.int64)
        levels, status, _ex = explore_levels(
            seeds[t], p, offsets, origin, rmax, budget, hw,
            queue, t_hi, t_lo, t_stamp, stamp)
        if status == STATUS_OK:
            if levels[r] > 0:
                n_h_r += 1
            if levels[rmax] > 0:
                n_h_2r += 1
        elif exhausted:
            # DFS saw the whole cluster, so the BFS cannot have overflowed
            n_undecided += 1
        else:
            n_undecided += 1
    return n_h_r, n_h_2r, n_undecided


@njit(cache=True)
def first_one_arm_hit(seeds, p, offsets, rmax, budget, hw):
    """Index of the first seed whose one-arm event H(rmax) holds, else -1.

    Budget- or box-truncated attempts are skipped (counted as misses).
    """
    d = offsets.shape[1]
    cap = 1
    while cap < 4 * (budget + 2):
        cap <<= 1
    queue = np.empty((budget + 2, d), dtype=np.int64)
    t_hi = np.empty(cap, dtype=np.int64)
    t_lo = np.empty(cap, dtype=np.int64)
    t_stamp = np.zeros(cap, dtype=np.int64)
    origin = np.zeros(d, dtype=np.int64)
    for t in range(seeds.shape[0]):
        levels, status, _ex = explore_levels(
            seeds[t], p, offsets, origin, rmax, budget, hw,
            queue, t_hi, t_lo, t_stamp, t + 1)
        if status == STATUS_OK and levels[rmax] > 0:
            return t
    return -1


@njit(cache=True)
def cluster_size_batch(seeds, p, offsets, cap_size, hw):
    """|C(0)| per trial, exact up to ``cap_size`` (larger returns cap_size+1).

    Returns (sizes[trials], n_box) where a box-overflow trial is recorded
    as -1 and counted.
    """
    d = offsets.shape[1]
    K = offsets.shape[0]
    axes, bits, _lim = packing_geometry_nb(d)
    tcap = 1
    while tcap < 4 * (cap_size + 2):
        tcap <<= 1
    mask = tcap - 1
    queue = np.empty((cap_size + 2, d), dtype=np.int64)
    t_hi = np.empty(tcap, dtype=np.int64)
    t_lo = np.empty(tcap, dtype=np.int64)
    t_stamp = np.zeros(tcap, dtype=np.int64)
    w = np.empty(d, dtype=np.int64)

    sizes = np.empty(seeds.shape[0], dtype=np.int64)
    n_box = 0
    for t in range(seeds.shape[0]):
        seed_u = U64(seeds[t])
        stamp = t + 1
        for i in range(d):
            queue[0, i] = 0
        hi0, lo0 = _pack(queue[0], d, axes, bits, hw)
        _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi0, lo0)
        size = 1
        head = 0
        tail = 1
        status = STATUS_OK
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(K):
                ok = True
                for i in range(d):
                    c = u[i] + offsets[k, i]
                    if c > hw or c < -hw:
                        ok = False
                        break
                    w[i] = c
                if not ok:
                    status = STATUS_BOX
                    break
                if not _open_edge(seed_u, p, u, w, d):
                    continue
                hi_k, lo_k = _pack(w, d, axes, bits, hw)
                if _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi_k, lo_k):
                    size += 1
                    if size > cap_size:
                        status = STATUS_CAP
                        break
                    for i in range(d):
                        queue[tail, i] = w[i]
                    tail += 1
            if status != STATUS_OK:
                break
        if status == STATUS_BOX:
            sizes[t] = -1
            n_box += 1
        elif status == STATUS_CAP:
            sizes[t] = cap_size + 1
        else:
            sizes[t] = size
    return sizes, n_box


@njit(cache=True)
def reach_targets_batch(seeds, p, offsets, targets, box_r, cap_size, hw):
    """Connectivity 0 <-> target within the box [-box_r, box_r]^d, per trial.

    Explores the open cluster of the origin restricted to the box (paths may
    not leave it) and reports which targets it contains.  Returns
    (found[trials, n_targets] uint8, capped[trials] uint8).
    """
    d = offsets.shape[1]
    K = offsets.shape[0]
    nt = targets.shape[0]
    axes, bits, _lim = packing_geometry_nb(d)
    tcap = 1
    while tcap < 4 * (cap_size + 2):
        tcap <<= 1
    mask = tcap - 1
    queue = np.empty((cap_size + 2, d), dtype=np.int64)
    t_hi = np.empty(tcap, dtype=np.int64)
    t_lo = np.empty(tcap, dtype=np.int64)
    t_stamp = np.zeros(tcap, dtype=np.int64)
    w = np.empty(d, dtype=np.int64)
    tg_hi = np.empty(nt, dtype=np.int64)
    tg_lo = np.empty(nt, dtype=np.int64)
    for j in range(nt):
        hi_j, lo_j = _pack(targets[j], d, axes, bits, hw)
        tg_hi[j] = hi_j
        tg_lo[j] = lo_j

    found = np.zeros((seeds.shape[0], nt), dtype=np.uint8)
    capped = np.zeros(seeds.shape[0], dtype=np.uint8)
    for t in range(seeds.shape[0]):
        seed_u = U64(seeds[t])
        stamp = t + 1
        for i in range(d):
            queue[0, i] = 0
        hi0, lo0 = _pack(queue[0], d, axes, bits, hw)
        _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi0, lo0)
        remaining = nt
        for j in range(nt):
            if tg_hi[j] == hi0 and tg_lo[j] == lo0:
                found[t, j] = 1
                remaining -= 1
        size = 1
        head = 0
        tail = 1
        while head < tail and remaining > 0:
            u = queue[head]
            head += 1
            for k in range(K):
                ok = True
                for i in range(d):
                    c = u[i] + offsets[k, i]
                    if c > box_r or c < -box_r:
                        ok = False
                        break
                    w[i] = c
                if not ok:
                    continue
                if not _open_edge(seed_u, p, u, w, d):
                    continue
                hi_k, lo_k = _pack(w, d, axes, bits, hw)
                if _probe_insert(t_hi, t_lo, t_stamp, mask, stamp, hi_k, lo_k):
                    size += 1
                    if size > cap_size:
                        capped[t] = 1
                        remaining = 0
                        break
                    for j in range(nt):
                        if found[t, j] == 0 and tg_hi[j] == hi_k and tg_lo[j] == lo_k:
                            found[t, j] = 1
                            remaining -= 1
                    for i in range(d):
                        queue[tail, i] = w[i]
                    tail += 1
            if capped[t] == 1:
                break
    return found, capped


@njit(cache=True)
def walk_batch(indptr, indices, origin, depth, max_steps, targets,
               checkpoints, seed, trials, flag_depth):
    """Simple-random-walk trials on a compacted graph.

    Each trial walks from ``origin``; uniform neighbor steps.  Records the
    first hitting time of each depth in ``targets`` (sorted ascending; -1 if
    not hit within ``max_steps``), the count of distinct visited vertices at
    each step in ``checkpoints`` (sorted ascending), and whether the walk
    ever stood at depth >= ``flag_depth``.  A trial with targets stops once
    the deepest target is hit.
    """
    n = indptr.shape[0] - 1
    nt = targets.shape[0]
    ncp = checkpoints.shape[0]
    taus = np.full((trials, nt), -1, dtype=np.int64)
    ranges = np.zeros((trials, ncp), dtype=np.int64)
    trunc = np.zeros(trials, dtype=np.uint8)
    stamp = np.zeros(n, dtype=np.int64)
    seed_u = U64(seed) ^ _WALK_DOMAIN_U

    for t in range(trials):
        state = _mix64_nb(seed_u + U64(t) * _G_U)
        mark = t + 1
        pos = origin
        stamp[pos] = mark
        visited = 1
        tg_i = 0
        cp_i = 0
        step = 0
        if nt > 0 and depth[pos] >= targets[0]:
            while tg_i < nt and depth[pos] >= targets[tg_i]:
                taus[t, tg_i] = 0
                tg_i += 1
        while step < max_steps and (nt == 0 or tg_i < nt):
            lo = indptr[pos]
            deg = indptr[pos + 1] - lo
            state, rnd = _next_state_nb(state)
            k = np.int64(((rnd >> _S11) * U64(deg)) >> _S53)
            pos = indices[lo + k]
            step += 1
            if stamp[pos] != mark:
                stamp[pos] = mark
                visited += 1
            dp = depth[pos]
            if dp >= flag_depth:
                trunc[t] = 1
            while tg_i < nt and dp >= targets[tg_i]:
                taus[t, tg_i] = step
                tg_i += 1
            while cp_i < ncp and checkpoints[cp_i] == step:
                ranges[t, cp_i] = visited
                cp_i += 1
    return taus, ranges, trunc


@njit(cache=True)
def commute_batch(indptr, indices, x, y, trials, seed):
    """Round-trip times x -> y -> x of the simple random walk, per trial."""
    out = np.empty(trials, dtype=np.int64)
    seed_u = U64(seed) ^ _WALK_DOMAIN_U
    for t in range(trials):
        state = _mix64_nb((seed_u + U64(t) * _G_U) ^ U64(0xC0331))
        steps = 0
        pos = x
        target = y
        legs = 0
        while legs < 2:
            lo = indptr[pos]
            deg = indptr[pos + 1] - lo
            state, rnd = _next_state_nb(state)
            k = np.int64(((rnd >> _S11) * U64(deg)) >> _S53)
            pos = indices[lo + k]
            steps += 1
            if pos == target:
                legs += 1
                target = x if legs == 1 else y
        out[t] = steps
    return out


@njit(cache=True)
def lane_counts(indptr, indices, depth, r, j_lo, j_hi):
    """Lanes per level j in [j_lo, j_hi] for one-arm radius r.

    A cut edge between levels j-1 and j is a lane when its upper endpoint
    reaches level r in the graph with level j-1 removed; one reverse
    reachability BFS per level.
    """
    n = indptr.shape[0] - 1
    nj = j_hi - j_lo + 1
    counts = np.zeros(nj, dtype=np.int64)
    mark = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for jj in range(nj):
        j = j_lo + jj
        stamp = jj + 1
        head = 0
        tail = 0
        for v in range(n):
            if depth[v] == r:
                queue[tail] = v
                tail += 1
                mark[v] = stamp
        while head < tail:
            v = queue[head]
            head += 1
            for ptr in range(indptr[v], indptr[v + 1]):
                w = indices[ptr]
                if mark[w] != stamp and depth[w] != j - 1:
                    mark[w] = stamp
                    queue[tail] = w
                    tail += 1
        c = 0
        for v in range(n):
            if depth[v] == j and mark[v] == stamp:
                for ptr in range(indptr[v], indptr[v + 1]):
                    if depth[indices[ptr]] == j - 1:
                        c += 1
        counts[jj] = c
    return counts


@njit(cache=True)
def return_curve_kernel(indptr, indices, inv_deg, origin, checkpoints,
                        boundary_idx):
    """Distribution iteration for even-time return probabilities.

    Iterates the one-step transition on a probability vector.  At each step
    n in ``checkpoints`` (sorted ascending) reads off

        p_{2n}(0,0) = deg(0) * sum_x psi_n(x)^2 / deg(x),

    the even-time return probability via reversibility of the walk.
    Returns (p2n[ncp], boundary_mass_max, max_conservation_error):
    the largest mass the iterated distribution ever places on
    ``boundary_idx`` (the truncation shell), and the largest deviation of
    the vector sum from 1, both tracked at every step.
    """
    n = indptr.shape[0] - 1
    ncp = checkpoints.shape[0]
    psi = np.zeros(n, dtype=np.float64)
    phi = np.empty(n, dtype=np.float64)
    nxt = np.zeros(n, dtype=np.float64)
    psi[origin] = 1.0
    out = np.zeros(ncp, dtype=np.float64)
    deg0 = float(indptr[origin + 1] - indptr[origin])
    max_err = 0.0
    bmax = 0.0
    cp_i = 0
    nsteps = checkpoints[ncp - 1] if ncp > 0 else 0

    for step in range(1, nsteps + 1):
        tot = 0.0
        for v in range(n):
            phi[v] = psi[v] * inv_deg[v]
            tot += psi[v]
        err = abs(tot - 1.0)
        if err > max_err:
            max_err = err
        for v in range(n):
            acc = 0.0
            for ptr in range(indptr[v], indptr[v + 1]):
                acc += phi[indices[ptr]]
            nxt[v] = acc
        tmp = psi
        psi = nxt
        nxt = tmp
        bm = 0.0
        for b in range(boundary_idx.shape[0]):
            bm += psi[boundary_idx[b]]
        if bm > bmax:
            bmax = bm
        while cp_i < ncp and checkpoints[cp_i] == step:
            s = 0.0
            for v in range(n):
                s += psi[v] * psi[v] * inv_deg[v]
            out[cp_i] = deg0 * s
            cp_i += 1
    return out, bmax, max_err


@njit(cache=True)
def return_curve_bipartite_kernel(indptr, indices, inv_deg, n_origin_class,
                                  origin, checkpoints, boundary_idx):
    """Parity-split twin of :func:`return_curve_kernel` for bipartite samples.

    Expects vertices reordered so the origin's parity class occupies
    [0, n_origin_class) and the other class [n_origin_class, n): after t
    steps the distribution lives on one class, so each step touches half
    the rows and half the arcs, contiguously.  Outputs match the general
    kernel exactly.
    """
    n = indptr.shape[0] - 1
    ncp = checkpoints.shape[0]
    psi = np.zeros(n, dtype=np.float64)
    phi = np.zeros(n, dtype=np.float64)
    nxt = np.zeros(n, dtype=np.float64)
    psi[origin] = 1.0
    out = np.zeros(ncp, dtype=np.float64)
    deg0 = float(indptr[origin + 1] - indptr[origin])
    max_err = 0.0
    bmax = 0.0
    cp_i = 0
    nsteps = checkpoints[ncp - 1] if ncp > 0 else 0

    for step in range(1, nsteps + 1):
        if (step - 1) % 2 == 0:
            src_lo, src_hi = 0, n_origin_class
            dst_lo, dst_hi = n_origin_class, n
        else:
            src_lo, src_hi = n_origin_class, n
            dst_lo, dst_hi = 0, n_origin_class
        tot = 0.0
        for v in range(src_lo, src_hi):
            phi[v] = psi[v] * inv_deg[v]
            tot += psi[v]
        err = abs(tot - 1.0)
        if err > max_err:
            max_err = err
        for v in range(dst_lo, dst_hi):
            acc = 0.0
            for ptr in range(indptr[v], indptr[v + 1]):
                acc += phi[indices[ptr]]
            nxt[v] = acc
        tmp = psi
        psi = nxt
        nxt = tmp
        bm = 0.0
        for b in range(boundary_idx.shape[0]):
            bi = boundary_idx[b]
            if dst_lo <= bi < dst_hi:
                bm += psi[bi]
        if bm > bmax:
            bmax = bm
        while cp_i < ncp and checkpoints[cp_i] == step:
            s = 0.0
            for v in range(dst_lo, dst_hi):
                s += psi[v] * psi[v] * inv_deg[v]
            out[cp_i] = deg0 * s
            cp_i += 1
    return out, bmax, max_err
