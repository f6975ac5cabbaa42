"""Exponent regressions, criticality estimation, and scaling diagnostics.

All Monte Carlo curves carry binomial or empirical standard errors and the
log-log fits are inverse-variance weighted: the observables here (cluster
sizes, ball volumes) are heavy tailed and unweighted fits would be
dominated by the noisiest decade.

A *tree emulation* backend (loopless exploration of the regular tree via
its branching-process level recursion) is first class: every estimator can
run against it, where the critical point and every exponent are known
exactly, before being pointed at a lattice.  That separates estimator bugs
from lattice physics.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import LatticeSpec
from .rng import derive_seed, derive_seeds
from .tree import (TreeSpec, gw_cluster_sizes, gw_level_sizes,
                   gw_survival_counts)

DEFAULT_BUDGET = 200000


# ---------------------------------------------------------------------------
# log-log regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitPolicy:
    """Fit-range policy: which scales enter a log-log regression."""

    min_scale: float | None = None
    max_scale: float | None = None
    min_points: int = 4
    policy_id: str = "default"


WALK_POLICY = FitPolicy(min_scale=100.0, policy_id="walk-burnin-100")


@dataclass
class ExponentEstimate:
    slope: float
    intercept: float
    stderr_slope: float
    fit_range: tuple
    points: list                  # (scale, value, weight) actually used
    policy_id: str

    def __str__(self):
        return (f"slope {self.slope:+.4f} +- {self.stderr_slope:.4f} "
                f"over scales [{self.fit_range[0]:g}, {self.fit_range[1]:g}] "
                f"({len(self.points)} points, policy {self.policy_id})")


def fit_exponent(points, policy: FitPolicy | None = None) -> ExponentEstimate:
    """Weighted least squares on (log scale, log value).

    ``points`` is an iterable of (scale, value) or (scale, value, stderr)
    tuples.  With stderrs present, weights are inverse variances of the log
    values (delta method: sigma_log = stderr/value) and the slope error
    comes from the known-variance WLS formula; without them the fit is
    ordinary least squares with a residual-based error.
    """
    policy = policy or FitPolicy()
    rows = []
    for pt in points:
        scale, value = float(pt[0]), float(pt[1])
        stderr = float(pt[2]) if len(pt) > 2 and pt[2] is not None else None
        if policy.min_scale is not None and scale < policy.min_scale:
            continue
        if policy.max_scale is not None and scale > policy.max_scale:
            continue
        rows.append((scale, value, stderr))
    if len(rows) < policy.min_points:
        raise ValueError(
            f"{len(rows)} points after policy filtering, need >= {policy.min_points}")
    rows.sort()
    scales = np.array([r[0] for r in rows])
    values = np.array([r[1] for r in rows])
    if np.any(scales <= 0):
        raise ValueError("nonpositive scale: log-log fit undefined")
    if np.any(values <= 0):
        bad = scales[values <= 0]
        raise ValueError(f"nonpositive values at scales {bad.tolist()}: "
                         "log undefined; prune or add trials")
    if np.any(np.diff(scales) <= 0):
        raise ValueError("scales must be strictly increasing")
    stderrs = [r[2] for r in rows]
    weighted = all(s is not None and s > 0 for s in stderrs)

    x = np.log(scales)
    y = np.log(values)
    if weighted:
        w = (values / np.array(stderrs)) ** 2
    else:
        w = np.ones_like(x)
    W = np.sum(w)
    xbar = np.sum(w * x) / W
    ybar = np.sum(w * y) / W
    sxx = np.sum(w * (x - xbar) ** 2)
    slope = np.sum(w * (x - xbar) * (y - ybar)) / sxx
    intercept = ybar - slope * xbar
    if weighted:
        stderr_slope = np.sqrt(1.0 / sxx)
    else:
        resid = y - (intercept + slope * x)
        dof = max(len(x) - 2, 1)
        stderr_slope = np.sqrt(np.sum(resid ** 2) / dof / sxx)
    used = [(float(s), float(v), float(wi)) for s, v, wi in zip(scales, values, w)]
    return ExponentEstimate(slope=float(slope), intercept=float(intercept),
                            stderr_slope=float(stderr_slope),
                            fit_range=(float(scales[0]), float(scales[-1])),
                            points=used, policy_id=policy.policy_id)


# ---------------------------------------------------------------------------
# one-arm and volume curves (shared samples per trial)
# ---------------------------------------------------------------------------

@dataclass
class BallCurves:
    """Per-radius one-arm hits and ball volumes from shared exploration."""

    rmax: int
    trials_requested: int
    trials_ok: int
    budget_exceeded: int
    box_exceeded: int
    hit_counts: np.ndarray     # int64[rmax+1]
    vol_sum: np.ndarray
    vol_sumsq: np.ndarray

    def h_prob(self, r: int):
        n = self.trials_ok
        p = self.hit_counts[r] / n
        return p, np.sqrt(max(p * (1 - p), 0.0) / n)

    def volume(self, r: int):
        n = self.trials_ok
        m = self.vol_sum[r] / n
        var = max(self.vol_sumsq[r] / n - m * m, 0.0)
        return m, np.sqrt(var / max(n - 1, 1))

    def one_arm_points(self, r_list):
        return [(r, *self.h_prob(r)) for r in r_list]

    def volume_points(self, r_list):
        return [(r, *self.volume(r)) for r in r_list]

    @staticmethod
    def merge(parts):
        out = parts[0]
        for p in parts[1:]:
            out.trials_requested += p.trials_requested
            out.trials_ok += p.trials_ok
            out.budget_exceeded += p.budget_exceeded
            out.box_exceeded += p.box_exceeded
            out.hit_counts = out.hit_counts + p.hit_counts
            out.vol_sum = out.vol_sum + p.vol_sum
            out.vol_sumsq = out.vol_sumsq + p.vol_sumsq
        return out


def _ball_chunk(args):
    spec, rmax, seeds, budget = args
    hits, vs, vs2, n_ok, n_b, n_x = _kernels.ball_curve_batch(
        seeds, spec.p, spec.offsets_array(), rmax, budget,
        spec.effective_halfwidth)
    return BallCurves(rmax=rmax, trials_requested=len(seeds), trials_ok=n_ok,
                      budget_exceeded=n_b, box_exceeded=n_x, hit_counts=hits,
                      vol_sum=vs, vol_sumsq=vs2)


def lattice_ball_curves(spec: LatticeSpec, rmax: int, trials: int, seed: int,
                        budget: int = DEFAULT_BUDGET,
                        workers: int = 1) -> BallCurves:
    """Explore B(0, rmax) once per trial; one-arm and volume curves share samples.

    Sharing makes the estimated P(H(r)) exactly nonincreasing in r and
    B(0,r) nested across r within each trial.
    """
    seeds = derive_seeds(seed, trials)
    if workers > 1:
        chunks = np.array_split(seeds, min(workers * 4, trials))
        args = [(spec, rmax, np.ascontiguousarray(c), budget)
                for c in chunks if len(c)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_ball_chunk, args))
        return BallCurves.merge(parts)
    return _ball_chunk((spec, rmax, seeds, budget))


def tree_ball_curves(spec: TreeSpec, p: float, rmax: int, trials: int,
                     seed: int) -> BallCurves:
    """Tree-emulation twin of :func:`lattice_ball_curves` (loopless exploration)."""
    lv = gw_level_sizes(spec, p, rmax, trials, seed, root_degree=spec.ell)
    vols = np.cumsum(lv, axis=1).astype(np.float64)
    hits = (lv > 0).sum(axis=0).astype(np.int64)
    return BallCurves(rmax=rmax, trials_requested=trials, trials_ok=trials,
                      budget_exceeded=0, box_exceeded=0, hit_counts=hits,
                      vol_sum=vols.sum(axis=0), vol_sumsq=(vols ** 2).sum(axis=0))


# ---------------------------------------------------------------------------
# critical-point estimation by finite-size crossing
# ---------------------------------------------------------------------------

@dataclass
class PcEstimate:
    p_hat: float
    uncertainty: float
    method: str
    scales: tuple


class PcBracketError(RuntimeError):
    """The crossing statistic does not change sign over the bracket."""


def _h_pair_chunk(args):
    spec, r, seeds, budget = args
    return _kernels.h_pair_batch(seeds, spec.p, spec.offsets_array(), r,
                                 budget, spec.effective_halfwidth,
                                 spec.range_)


def _crossing_statistic(spec, p: float, r: int, trials: int, seed: int,
                        budget: int, workers: int = 1):
    """Delta(p) = 2r P(H(2r)) - r P(H(r)) on shared samples, with stderr."""
    if isinstance(spec, TreeSpec):
        counts = gw_survival_counts(spec, p, [r, 2 * r], trials, seed,
                                    root_degree=spec.ell)
        p1, p2 = counts[0] / trials, counts[1] / trials
        n = trials
    else:
        seeds = derive_seeds(seed, trials)
        sp = spec.with_p(p)
        if workers > 1:
            chunks = [np.ascontiguousarray(c)
                      for c in np.array_split(seeds, workers * 2) if len(c)]
            with ProcessPoolExecutor(max_workers=workers) as ex:
                parts = list(ex.map(_h_pair_chunk,
                                    [(sp, r, c, budget) for c in chunks]))
            h1 = sum(p_[0] for p_ in parts)
            h2 = sum(p_[1] for p_ in parts)
            und = sum(p_[2] for p_ in parts)
        else:
            h1, h2, und = _h_pair_chunk((sp, r, seeds, budget))
        n = trials - und
        p1, p2 = h1 / n, h2 / n
    delta = 2 * r * p2 - r * p1
    var = (2 * r) ** 2 * p2 * (1 - p2) / n + r ** 2 * p1 * (1 - p1) / n
    return delta, np.sqrt(var)


def estimate_pc(spec, r_probe: int, trials: int, seed: int,
                bracket=(0.01, 0.99), max_iter: int = 25,
                p_tol: float = 2e-4, budget: int = DEFAULT_BUDGET,
                workers: int = 1) -> PcEstimate:
    """Criticality from the finite-size crossing of r * P(H(r)).

    At the critical point r * P(H(r)) is scale invariant, so the curves for
    r_probe and 2 r_probe cross there: bisection on the sign of
    2r P(H(2r)) - r P(H(r)).  The uncertainty combines the final bracket
    width with binomial noise propagated through the local slope of the
    statistic.
    """
    if r_probe < 8:
        raise ValueError("r_probe must be >= 8 for a usable crossing")
    lo, hi = bracket
    f_lo, _ = _crossing_statistic(spec, lo, r_probe, trials,
                                  derive_seed(seed, 0), budget, workers)
    f_hi, _ = _crossing_statistic(spec, hi, r_probe, trials,
                                  derive_seed(seed, 1), budget, workers)
    # subcritical side: Delta < 0 near criticality, exactly 0 deep in the
    # dead zone (no survival at either radius), so accept <= 0 at lo
    if not (f_lo <= 0 < f_hi):
        raise PcBracketError(
            f"no crossing in bracket [{lo}, {hi}]: Delta({lo})={f_lo:.3f}, "
            f"Delta({hi})={f_hi:.3f} (need nonpositive -> positive)")
    sigma_mid = 0.0
    for it in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid, sigma_mid = _crossing_statistic(
            spec, mid, r_probe, trials, derive_seed(seed, 2 + it), budget,
            workers)
        if f_mid <= 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo < p_tol:
            break
    slope = abs(f_hi - f_lo) / max(hi - lo, 1e-12)
    noise_term = sigma_mid / slope if slope > 0 else np.inf
    uncertainty = 0.5 * (hi - lo) + noise_term
    return PcEstimate(p_hat=0.5 * (lo + hi), uncertainty=float(uncertainty),
                      method=f"finite-size crossing r*P(H(r)), r={r_probe},{2*r_probe}",
                      scales=(r_probe, 2 * r_probe))


# ---------------------------------------------------------------------------
# two-point function and triangle diagnostic
# ---------------------------------------------------------------------------

@dataclass
class TwoPointCurve:
    targets: list
    norms: np.ndarray
    p_hat: np.ndarray
    stderr: np.ndarray
    capped: int
    trials: int

    def points(self):
        return [(float(n), float(p), float(s))
                for n, p, s in zip(self.norms, self.p_hat, self.stderr)]


def two_point_probe(spec: LatticeSpec, x_list, trials: int, seed: int,
                    cap: int = DEFAULT_BUDGET,
                    box_radius: int | None = None) -> TwoPointCurve:
    """Monte Carlo P(0 <-> x) for each x, decided by capped BFS in a box.

    All targets are checked against the same explored cluster per trial
    (shared samples).  Trials whose exploration hits the cap are counted in
    ``capped``; their connectivities are reported as found-so-far (a lower
    bound), so the capped count bounds the bias.
    """
    targets = np.asarray([tuple(int(c) for c in x) for x in x_list],
                         dtype=np.int64).reshape(len(x_list), spec.d)
    norms = np.linalg.norm(targets.astype(float), axis=1)
    if box_radius is None:
        box_radius = int(2 * np.abs(targets).max() + 2)
    if box_radius > spec.effective_halfwidth:
        raise ValueError("box exceeds working box")
    seeds = derive_seeds(seed, trials)
    found, capped = _kernels.reach_targets_batch(
        seeds, spec.p, spec.offsets_array(), targets, box_radius, cap,
        spec.effective_halfwidth)
    hits = found.sum(axis=0).astype(float)
    p_hat = hits / trials
    stderr = np.sqrt(np.maximum(p_hat * (1 - p_hat), 0.0) / trials)
    return TwoPointCurve(targets=[tuple(int(c) for c in t) for t in targets],
                         norms=norms,
                         p_hat=p_hat, stderr=stderr,
                         capped=int(capped.sum()), trials=trials)


@dataclass
class TriangleReport:
    """Dyadic-shell trend of the triangle sum built on a fitted two-point curve.

    With P(0<->x) modeled as c |x|^a, the contribution of the dyadic shell
    at radius R to sum_{x,y} P(0<->x) P(x<->y) P(y<->0) scales as
    R^(2d + 3a): R^d choices for each of x and y, three decaying factors.
    Negative shell exponent means geometrically decaying increments, i.e.
    a convergent sum; the origin term contributes 1 (0^a := 1).
    """

    shell_radii: list
    increments: list
    partial_sums: list
    shell_exponent: float
    geometric_ratio: float
    converging: bool
    amplitude: float
    exponent: float


def shell_trend(d: int, exponent: float, amplitude: float, box_radius: int):
    """Dyadic-shell increments of the triangle sum for P(0<->x) = c |x|^a.

    Shell at radius R contributes ~ R^d * R^d pairs times (c R^a)^3, so the
    increment exponent is 2d + 3a; with the mean-field a = 2 - d this is
    6 - d, negative exactly above six dimensions.  Returns (radii,
    increments, partial_sums) with the origin term contributing 1.
    """
    e = 2 * d + 3 * exponent
    radii = []
    increments = []
    partial = [1.0]
    R = 1
    while R <= box_radius:
        inc = (amplitude ** 3) * (R ** e)
        radii.append(R)
        increments.append(inc)
        partial.append(partial[-1] + inc)
        R *= 2
    return radii, increments, partial[1:]


def triangle_sum_probe(spec: LatticeSpec, box_radius: int, trials: int,
                       seed: int, cap: int = DEFAULT_BUDGET) -> TriangleReport:
    """Estimate the two-point curve on dyadic axis scales, then report the
    shell-sum convergence indicator of the triangle diagram."""
    scales = []
    s = 1
    while s <= box_radius // 2:
        scales.append(s)
        s *= 2
    if len(scales) < 2:
        raise ValueError("box_radius too small for a dyadic probe")
    xs = [tuple([k] + [0] * (spec.d - 1)) for k in scales]
    curve = two_point_probe(spec, xs, trials, seed, cap=cap,
                            box_radius=box_radius)
    pos = curve.p_hat > 0
    if not np.any(pos):
        # zero curve: only the origin term survives
        radii = [2 ** k for k in range(len(scales))]
        return TriangleReport(shell_radii=radii,
                              increments=[0.0] * len(radii),
                              partial_sums=[1.0] * len(radii),
                              shell_exponent=-np.inf, geometric_ratio=0.0,
                              converging=True, amplitude=0.0, exponent=0.0)
    pts = [(n, p, s if s > 0 else None)
           for n, p, s, ok in zip(curve.norms, curve.p_hat, curve.stderr, pos)
           if ok]
    if len(pts) >= 2:
        fit = fit_exponent(pts, FitPolicy(min_points=2, policy_id="triangle"))
        a, c = fit.slope, float(np.exp(fit.intercept))
    else:
        a, c = 2 - spec.d, float(curve.p_hat[pos][0])
    shell_exponent = 2 * spec.d + 3 * a
    ratio = 2.0 ** shell_exponent
    radii, increments, partials = shell_trend(spec.d, a, c, box_radius)
    return TriangleReport(shell_radii=radii, increments=increments,
                          partial_sums=partials,
                          shell_exponent=float(shell_exponent),
                          geometric_ratio=float(ratio),
                          converging=bool(shell_exponent < 0),
                          amplitude=c, exponent=float(a))


# ---------------------------------------------------------------------------
# volume recursion and cluster tail
# ---------------------------------------------------------------------------

@dataclass
class VolumeRecursionRow:
    r: int
    g_r: float
    g_2r: float
    ratio: float          # G(2r) * r / G(r)^2
    stderr_ratio: float


def volume_recursion_check(spec, r_list, trials: int, seed: int,
                           budget: int = DEFAULT_BUDGET,
                           workers: int = 1) -> list:
    """Table of G(2r) * r / G(r)^2 with G(r) = E|B(0,r)| by Monte Carlo.

    A lower bound on this ratio staying positive across r is the visible
    trace of the quadratic volume recursion driving mean-field growth.
    """
    r_list = sorted(int(r) for r in r_list)
    rmax = 2 * r_list[-1]
    if isinstance(spec, TreeSpec):
        curves = tree_ball_curves(spec, spec.p_c, rmax, trials, seed)
    else:
        curves = lattice_ball_curves(spec, rmax, trials, seed, budget=budget,
                                     workers=workers)
    rows = []
    for r in r_list:
        g1, s1 = curves.volume(r)
        g2, s2 = curves.volume(2 * r)
        ratio = g2 * r / g1 ** 2
        rel = np.sqrt((s2 / g2) ** 2 + (2 * s1 / g1) ** 2)
        rows.append(VolumeRecursionRow(r=r, g_r=g1, g_2r=g2, ratio=float(ratio),
                                       stderr_ratio=float(ratio * rel)))
    return rows


@dataclass
class TailCurve:
    n: np.ndarray
    p_hat: np.ndarray
    stderr: np.ndarray
    trials: int
    cap: int
    cap_exceeded: int
    box_exceeded: int = 0

    def points(self):
        return [(float(n), float(p), float(s))
                for n, p, s in zip(self.n, self.p_hat, self.stderr)]


def cluster_tail_probe(spec, n_list, trials: int, seed: int,
                       workers: int = 1) -> TailCurve:
    """P(|C(0)| > n) for each n, from capped cluster exploration."""
    n_arr = np.asarray(sorted(int(v) for v in n_list), dtype=np.int64)
    cap = int(n_arr[-1])
    n_box = 0
    if isinstance(spec, TreeSpec):
        sizes = gw_cluster_sizes(spec, spec.p_c, trials, cap, seed,
                                 root_degree=spec.ell)
    else:
        seeds = derive_seeds(seed, trials)
        sizes, n_box = _kernels.cluster_size_batch(
            seeds, spec.p, spec.offsets_array(), cap, spec.effective_halfwidth)
        sizes = sizes[sizes >= 0]
    counts = np.array([(sizes > n).sum() for n in n_arr], dtype=float)
    m = len(sizes)
    p_hat = counts / m
    stderr = np.sqrt(np.maximum(p_hat * (1 - p_hat), 0.0) / m)
    return TailCurve(n=n_arr, p_hat=p_hat, stderr=stderr, trials=m, cap=cap,
                     cap_exceeded=int((sizes > cap).sum()), box_exceeded=n_box)


# ---------------------------------------------------------------------------
# the two-condition volume/resistance frequency table
# ---------------------------------------------------------------------------

@dataclass
class JLambdaTable:
    r_list: list
    lambda_list: list
    freq: np.ndarray          # (len(r_list), len(lambda_list))
    samples: int
    flagged: int

    def frequency(self, r, lam) -> float:
        return float(self.freq[self.r_list.index(r), self.lambda_list.index(lam)])


def j_lambda_frequency(sampler, r_list, lambda_list, samples: int, seed: int,
                       workers: int = 1) -> JLambdaTable:
    """Frequency of the joint volume/resistance regularity event.

    Per sample and radius r, checks (1) lambda^{-1} r^2 <= |B(0,r)| <=
    lambda r^2 and (2) R_eff(0, dB(0,r)) >= lambda^{-1} r; reports the
    empirical frequency per (r, lambda).  The event is nested in lambda, so
    each row is nondecreasing -- by construction, not by luck.
    """
    from .resistance import resistance_to_level
    r_list = sorted(int(r) for r in r_list)
    lambda_list = sorted(float(l) for l in lambda_list)
    rmax = r_list[-1]
    freq = np.zeros((len(r_list), len(lambda_list)))
    flagged = 0
    for i in range(samples):
        g = sampler(rmax, derive_seed(seed, i))
        depth_counts = np.bincount(g.depth, minlength=rmax + 1)
        vols = np.cumsum(depth_counts)
        for ri, r in enumerate(r_list):
            vol = vols[r]
            reff = resistance_to_level(g, r).r_eff
            for li, lam in enumerate(lambda_list):
                cond_vol = (r * r / lam) <= vol <= lam * r * r
                cond_res = reff >= r / lam
                if cond_vol and cond_res:
                    freq[ri, li] += 1
    freq /= samples
    return JLambdaTable(r_list=r_list, lambda_list=lambda_list, freq=freq,
                        samples=samples, flagged=flagged)
