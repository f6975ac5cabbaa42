"""Experiment orchestration: config validation, dispatch, persistence.

One experiment kind per measurable quantity; each run writes one CSV of
rows plus a JSON manifest (config echo, seed-derivation rule, content
hashes, timing, flag counts).  Re-running a config reproduces the CSV body
byte for byte: trial seeds derive from the master seed by index, rows are
sorted on their scale column, aggregation is an associative merge over
trial chunks (so thread count cannot change results), and floats are
written with repr (shortest round-trip form).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, estimators, lattice_iic, resistance, tree, walk
from .estimators import FitPolicy, fit_exponent
from .lattice import SPREAD_OUT, LatticeSpec, NEAREST_NEIGHBOR
from .rng import GOLDEN, SEED_DOMAIN, derive_seed
from .tree import TreeSpec

SEED_RULE = ("trial_seed(i) = mix64((mix64(master_seed XOR "
             f"{SEED_DOMAIN:#x}) + i * {GOLDEN:#x}) mod 2^64)")


class ConfigError(ValueError):
    """The experiment configuration violates its schema."""


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    threads: int = 1
    out_dir: str = "."
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        kind = raw.pop("kind", None)
        if kind not in RUNNERS:
            raise ConfigError(f"unknown experiment kind {kind!r}; "
                              f"choose from {sorted(RUNNERS)}")
        seed = raw.pop("seed", None)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError("config requires a nonnegative integer 'seed'")
        threads = raw.pop("threads", 1)
        if not isinstance(threads, int) or threads < 1:
            raise ConfigError("'threads' must be a positive integer")
        out_dir = raw.pop("out", ".")
        return cls(kind=kind, seed=seed, threads=threads, out_dir=out_dir,
                   params=raw)

    def echo(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed, "threads": self.threads,
             "out": self.out_dir}
        d.update(self.params)
        return d


@dataclass
class RunManifest:
    kind: str
    config: dict
    seed_rule: str
    csv_files: dict            # name -> sha256 of body
    flags: dict
    timing_seconds: float
    derived_seeds_head: list
    version: str = __version__
    meta: dict = field(default_factory=dict)

    def write(self, path: Path):
        body = {
            "kind": self.kind, "config": self.config,
            "seed_rule": self.seed_rule, "csv_files": self.csv_files,
            "flags": self.flags, "timing_seconds": self.timing_seconds,
            "derived_seeds_head": self.derived_seeds_head,
            "version": self.version, "meta": self.meta,
        }
        path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, columns: list, rows: list) -> str:
    """Write rows (sequences matching ``columns``); returns sha256 of the body."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    body = "\n".join(lines) + "\n"
    path.write_text(body)
    return hashlib.sha256(body.encode()).hexdigest()


# ---------------------------------------------------------------------------
# config pieces
# ---------------------------------------------------------------------------

def _require(params: dict, key: str, kind: str):
    if key not in params:
        raise ConfigError(f"experiment {kind!r} requires parameter {key!r}")
    return params[key]


def _positive_int(params: dict, key: str, kind: str, default=None) -> int:
    v = params.get(key, default)
    if v is None:
        raise ConfigError(f"experiment {kind!r} requires parameter {key!r}")
    if not isinstance(v, int) or v <= 0:
        raise ConfigError(f"{key!r} must be a positive integer, got {v!r}")
    return v


def _sorted_schedule(params: dict, key: str, kind: str) -> list:
    v = _require(params, key, kind)
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"{key!r} must be a nonempty list")
    out = sorted(v)
    if any(x <= 0 for x in out):
        raise ConfigError(f"{key!r} entries must be positive")
    return out


def make_spec(params: dict):
    """Build a TreeSpec or LatticeSpec from the config's model block."""
    if "tree" in params:
        t = params["tree"]
        spec = TreeSpec(ell=int(t["ell"]))
        return spec, float(t.get("p", spec.p_c))
    if "lattice" in params:
        lt = params["lattice"]
        spec = LatticeSpec(
            d=int(lt["d"]),
            edge_rule=lt.get("edge_rule", NEAREST_NEIGHBOR),
            L=int(lt.get("L", 1)),
            p=float(lt.get("p", 0.0)),
            box_halfwidth=int(lt.get("box_halfwidth", 1 << 20)))
        return spec, spec.p
    raise ConfigError("config needs a 'tree' or 'lattice' model block")


def tree_iic_sampler(ell: int):
    """sampler(R, seed) drawing size-biased trees, for the annealed drivers."""
    return partial(_kesten_adapter, ell)


def _kesten_adapter(ell, R, seed):
    return tree.sample_kesten_tree(TreeSpec(ell), R, seed)


def lattice_iic_sampler(spec: LatticeSpec, max_attempts: int = 100000):
    return partial(_lattice_iic_adapter, spec, max_attempts)


def _lattice_iic_adapter(spec, max_attempts, R, seed):
    r = max(1, (R + 1) // 2)
    return lattice_iic.sample_iic_ball(spec, r, seed,
                                       max_attempts=max_attempts).graph


# ---------------------------------------------------------------------------
# runners: one per experiment kind
# ---------------------------------------------------------------------------

def _run_ball_stats(cfg: ExperimentConfig):
    p = cfg.params
    spec, prob = make_spec(p)
    r_list = _sorted_schedule(p, "r_list", cfg.kind)
    trials = _positive_int(p, "trials", cfg.kind)
    budget = _positive_int(p, "vertex_budget", cfg.kind, estimators.DEFAULT_BUDGET)
    rmax = r_list[-1]
    if isinstance(spec, TreeSpec):
        curves = estimators.tree_ball_curves(spec, prob, rmax, trials, cfg.seed)
    else:
        curves = estimators.lattice_ball_curves(spec, rmax, trials, cfg.seed,
                                                budget=budget,
                                                workers=cfg.threads)
    rows = []
    for r in r_list:
        vol, vse = curves.volume(r)
        hp, hse = curves.h_prob(r)
        rows.append((r, vol, vse, hp, hse, curves.trials_ok))
    flags = {"budget_exceeded": curves.budget_exceeded,
             "box_exceeded": curves.box_exceeded}
    cols = ["r", "volume", "volume_stderr", "h_prob", "h_stderr", "trials_ok"]
    return cols, rows, flags, {}


def _run_one_arm(cfg: ExperimentConfig):
    cols, rows, flags, meta = _run_ball_stats(cfg)
    out = [(r, hp, hse, r * hp, ok) for (r, _v, _vs, hp, hse, ok) in rows]
    return (["r", "h_prob", "h_stderr", "r_times_h", "trials_ok"],
            out, flags, meta)


def _run_cluster_tail(cfg: ExperimentConfig):
    p = cfg.params
    spec, prob = make_spec(p)
    if not isinstance(spec, TreeSpec):
        spec = spec.with_p(prob)
    n_list = _sorted_schedule(p, "n_list", cfg.kind)
    trials = _positive_int(p, "trials", cfg.kind)
    curve = estimators.cluster_tail_probe(spec, n_list, trials, cfg.seed,
                                          workers=cfg.threads)
    rows = [(int(n), float(ph), float(se), curve.trials)
            for n, ph, se in zip(curve.n, curve.p_hat, curve.stderr)]
    flags = {"cap_exceeded": curve.cap_exceeded,
             "box_exceeded": curve.box_exceeded}
    meta = {}
    try:
        fit = fit_exponent(curve.points(), FitPolicy(policy_id="tail"))
        meta["slope"] = fit.slope
        meta["slope_stderr"] = fit.stderr_slope
    except ValueError:
        pass
    return ["n", "p_gt_n", "stderr", "trials"], rows, flags, meta


def _run_two_point(cfg: ExperimentConfig):
    p = cfg.params
    spec, prob = make_spec(p)
    if isinstance(spec, TreeSpec):
        raise ConfigError("two-point requires a lattice model")
    spec = spec.with_p(prob)
    xs = _require(p, "x_list", cfg.kind)
    trials = _positive_int(p, "trials", cfg.kind)
    cap = _positive_int(p, "cap", cfg.kind, estimators.DEFAULT_BUDGET)
    curve = estimators.two_point_probe(spec, xs, trials, cfg.seed, cap=cap,
                                       box_radius=p.get("box_radius"))
    rows = [(float(nm), json.dumps(list(x)).replace(",", ";"), float(ph),
             float(se), curve.trials)
            for nm, x, ph, se in zip(curve.norms, curve.targets,
                                     curve.p_hat, curve.stderr)]
    return (["norm", "x", "p_connect", "stderr", "trials"], rows,
            {"cap_exceeded": curve.capped}, {})


def _run_triangle(cfg: ExperimentConfig):
    p = cfg.params
    spec, prob = make_spec(p)
    if isinstance(spec, TreeSpec):
        raise ConfigError("triangle requires a lattice model")
    spec = spec.with_p(prob)
    box_radius = _positive_int(p, "box_radius", cfg.kind)
    trials = _positive_int(p, "trials", cfg.kind)
    rep = estimators.triangle_sum_probe(spec, box_radius, trials, cfg.seed)
    rows = list(zip(rep.shell_radii, rep.increments, rep.partial_sums))
    meta = {"shell_exponent": rep.shell_exponent,
            "geometric_ratio": rep.geometric_ratio,
            "converging": rep.converging,
            "fitted_exponent": rep.exponent, "fitted_amplitude": rep.amplitude}
    return ["shell_radius", "increment", "partial_sum"], rows, {}, meta


def _run_volume_recursion(cfg: ExperimentConfig):
    p = cfg.params
    spec, prob = make_spec(p)
    if not isinstance(spec, TreeSpec):
        spec = spec.with_p(prob)
    r_list = _sorted_schedule(p, "r_list", cfg.kind)
    trials = _positive_int(p, "trials", cfg.kind)
    rows_d = estimators.volume_recursion_check(spec, r_list, trials, cfg.seed,
                                               workers=cfg.threads)
    rows = [(row.r, row.g_r, row.g_2r, row.ratio, row.stderr_ratio)
            for row in rows_d]
    return ["r", "g_r", "g_2r", "ratio", "stderr_ratio"], rows, {}, {}


def _run_pc_estimate(cfg: ExperimentConfig):
    p = cfg.params
    spec, _prob = make_spec(p)
    r_probe = _positive_int(p, "r_probe", cfg.kind)
    trials = _positive_int(p, "trials", cfg.kind)
    bracket = tuple(p.get("bracket", (0.01, 0.99)))
    est = estimators.estimate_pc(spec, r_probe, trials, cfg.seed,
                                 bracket=bracket, workers=cfg.threads)
    rows = [(est.p_hat, est.uncertainty, r_probe, 2 * r_probe, trials)]
    return (["p_hat", "uncertainty", "r_probe", "r_probe_2", "trials"],
            rows, {}, {"method": est.method})


def _run_iic_tree(cfg: ExperimentConfig):
    p = cfg.params
    spec, _prob = make_spec(p)
    if not isinstance(spec, TreeSpec):
        raise ConfigError("iic-tree requires a tree model")
    r_list = _sorted_schedule(p, "r_list", cfg.kind)
    samples = _positive_int(p, "samples", cfg.kind)
    lv = tree.kesten_level_sizes(spec, r_list[-1], samples, cfg.seed)
    vols = np.cumsum(lv, axis=1)
    rows = []
    for r in r_list:
        col = vols[:, r].astype(float)
        rows.append((r, col.mean(), col.std(ddof=1) / np.sqrt(samples), samples))
    meta = {}
    fit = fit_exponent([(r, m, s) for r, m, s, _ in rows],
                       FitPolicy(policy_id="iic-volume"))
    meta["slope"] = fit.slope
    meta["slope_stderr"] = fit.stderr_slope
    return ["r", "volume", "stderr", "samples"], rows, {}, meta


def _run_iic_lattice(cfg: ExperimentConfig):
    p = cfg.params
    spec, prob = make_spec(p)
    if isinstance(spec, TreeSpec):
        raise ConfigError("iic-lattice requires a lattice model")
    spec = spec.with_p(prob)
    r = _positive_int(p, "r", cfg.kind)
    samples = _positive_int(p, "samples", cfg.kind)
    max_attempts = _positive_int(p, "max_attempts", cfg.kind, 100000)
    attempts = []
    vols = np.zeros((samples, r + 1))
    for i in range(samples):
        s = lattice_iic.sample_iic_ball(spec, r, derive_seed(cfg.seed, i),
                                        max_attempts=max_attempts)
        counts = np.bincount(s.graph.depth, minlength=2 * r + 1)
        vols[i] = np.cumsum(counts)[:r + 1]
        attempts.append(s.attempts)
    rows = []
    for rr in range(1, r + 1):
        col = vols[:, rr]
        rows.append((rr, col.mean(), col.std(ddof=1) / np.sqrt(samples), samples))
    meta = {"mean_attempts": float(np.mean(attempts)),
            "conditioning": "one-arm H(2r)", "p": spec.p}
    return ["r", "volume", "stderr", "samples"], rows, {}, meta


def _run_resistance(cfg: ExperimentConfig):
    p = cfg.params
    spec, _prob = make_spec(p)
    if not isinstance(spec, TreeSpec):
        raise ConfigError("resistance experiment runs on tree samples; "
                          "use j-lambda for lattice samples")
    r_list = _sorted_schedule(p, "r_list", cfg.kind)
    samples = _positive_int(p, "samples", cfg.kind)
    rows = []
    nw_violations = 0
    for r in r_list:
        reffs = []
        nws = []
        for i in range(samples):
            g = tree.sample_kesten_tree(spec, r, derive_seed(cfg.seed, r * 10**6 + i))
            exact = resistance.resistance_to_level(g, r).r_eff
            bound = resistance.nash_williams_bound(g, r).r_eff
            if bound > exact + 1e-8:
                nw_violations += 1
            reffs.append(exact)
            nws.append(bound)
        reffs = np.array(reffs)
        rows.append((r, float(np.median(reffs)), float(reffs.mean()),
                     float(np.median(nws)), float(np.median(reffs) / r),
                     samples))
    cols = ["r", "median_reff", "mean_reff", "median_nw", "median_reff_over_r",
            "samples"]
    return cols, rows, {"nw_violations": nw_violations}, {}


def _run_lanes(cfg: ExperimentConfig):
    p = cfg.params
    spec, _prob = make_spec(p)
    if not isinstance(spec, TreeSpec):
        raise ConfigError("lanes experiment runs on tree samples")
    r_list = _sorted_schedule(p, "r_list", cfg.kind)
    samples = _positive_int(p, "samples", cfg.kind)
    lambdas = p.get("lambda_list", [1, 2, 4])
    rows = []
    for r in r_list:
        totals = []
        rich = {lam: 0 for lam in lambdas}
        for i in range(samples):
            g = tree.sample_kesten_tree(spec, r, derive_seed(cfg.seed, r * 10**6 + i))
            rep = resistance.lane_report(g, r)
            totals.append(rep.total())
            for lam in lambdas:
                rich[lam] += rep.lane_rich(int(lam))
        row = [r, float(np.mean(totals)), samples]
        row += [rich[lam] / samples for lam in lambdas]
        rows.append(tuple(row))
    cols = ["r", "mean_total_lanes", "samples"] + \
        [f"rich_frac_lambda_{lam}" for lam in lambdas]
    return cols, rows, {}, {}


def _run_walk(cfg: ExperimentConfig):
    p = cfg.params
    spec, _prob = make_spec(p)
    if not isinstance(spec, TreeSpec):
        raise ConfigError("walk experiment runs on tree samples")
    r_list = _sorted_schedule(p, "r_list", cfg.kind)
    samples = _positive_int(p, "samples", cfg.kind)
    trials = _positive_int(p, "walk_trials", cfg.kind)
    curve = walk.annealed_tau_curve(tree_iic_sampler(spec.ell), r_list,
                                    samples, trials, cfg.seed,
                                    workers=cfg.threads)
    rows = [(int(r), float(m), float(se), samples, trials)
            for r, m, se in zip(curve.scale, curve.mean, curve.stderr)]
    meta = {}
    fit = fit_exponent(curve.points(), FitPolicy(policy_id="walk-tau"))
    meta["slope"] = fit.slope
    meta["slope_stderr"] = fit.stderr_slope
    flags = {"censored": curve.meta.get("censored", 0),
             "truncation_hit": curve.meta.get("truncation_hits", 0)}
    return (["r", "mean_tau", "stderr", "samples", "walk_trials"],
            rows, flags, meta)


def _run_return_curve(cfg: ExperimentConfig):
    p = cfg.params
    spec, _prob = make_spec(p)
    if not isinstance(spec, TreeSpec):
        raise ConfigError("return-curve experiment runs on tree samples")
    n_list = _sorted_schedule(p, "n_list", cfg.kind)
    samples = _positive_int(p, "samples", cfg.kind)
    curve = walk.annealed_return_curve(tree_iic_sampler(spec.ell),
                                       walk.default_r_schedule, n_list,
                                       samples, cfg.seed, workers=cfg.threads)
    rows = [(int(n), float(m), float(se), curve.samples_used)
            for n, m, se in zip(curve.scale, curve.mean, curve.stderr)]
    meta = dict(curve.meta)
    fit = fit_exponent(curve.points(), estimators.WALK_POLICY)
    meta["slope"] = fit.slope
    meta["slope_stderr"] = fit.stderr_slope
    flags = {"truncation_flagged": curve.flagged, "redraws": curve.redraws}
    return ["n", "mean_p2n", "stderr", "samples_used"], rows, flags, meta


def _run_j_lambda(cfg: ExperimentConfig):
    p = cfg.params
    spec, prob = make_spec(p)
    r_list = _sorted_schedule(p, "r_list", cfg.kind)
    lam_list = _require(p, "lambda_list", cfg.kind)
    samples = _positive_int(p, "samples", cfg.kind)
    if isinstance(spec, TreeSpec):
        sampler = tree_iic_sampler(spec.ell)
    else:
        sampler = lattice_iic_sampler(spec.with_p(prob))
    table = estimators.j_lambda_frequency(sampler, r_list, lam_list, samples,
                                          cfg.seed, workers=cfg.threads)
    rows = []
    for i, r in enumerate(table.r_list):
        for j, lam in enumerate(table.lambda_list):
            rows.append((r, lam, float(table.freq[i, j]), samples))
    return ["r", "lambda", "frequency", "samples"], rows, {}, {}


def _run_fit(cfg: ExperimentConfig):
    p = cfg.params
    path = _require(p, "input_csv", cfg.kind)
    scale_col = p.get("scale_column", 0)
    value_col = p.get("value_column", 1)
    stderr_col = p.get("stderr_column")
    pts = []
    with open(path) as fh:
        header = fh.readline()
        for line in fh:
            parts = line.strip().split(",")
            if not parts or not parts[0]:
                continue
            s = float(parts[scale_col])
            v = float(parts[value_col])
            e = float(parts[stderr_col]) if stderr_col is not None else None
            pts.append((s, v, e))
    policy = FitPolicy(min_scale=p.get("min_scale"),
                       max_scale=p.get("max_scale"),
                       policy_id=p.get("policy_id", "cli-fit"))
    fit = fit_exponent(pts, policy)
    rows = [(fit.slope, fit.stderr_slope, fit.intercept,
             fit.fit_range[0], fit.fit_range[1], len(fit.points))]
    return (["slope", "stderr_slope", "intercept", "min_scale", "max_scale",
             "points"], rows, {}, {"policy_id": fit.policy_id})


RUNNERS = {
    "ball-stats": _run_ball_stats,
    "one-arm": _run_one_arm,
    "cluster-tail": _run_cluster_tail,
    "two-point": _run_two_point,
    "triangle": _run_triangle,
    "volume-recursion": _run_volume_recursion,
    "pc-estimate": _run_pc_estimate,
    "iic-tree": _run_iic_tree,
    "iic-lattice": _run_iic_lattice,
    "resistance": _run_resistance,
    "lanes": _run_lanes,
    "walk": _run_walk,
    "return-curve": _run_return_curve,
    "j-lambda": _run_j_lambda,
    "fit": _run_fit,
}


def run(config: ExperimentConfig | dict) -> RunManifest:
    """Validate, dispatch, persist.  Returns the manifest (also written)."""
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    cols, rows, flags, meta = RUNNERS[config.kind](config)
    elapsed = time.time() - t0
    csv_name = f"{config.kind}.csv"
    digest = write_csv(out_dir / csv_name, cols, rows)
    n_seeds = min(_head_seed_count(config), 100)
    manifest = RunManifest(
        kind=config.kind, config=config.echo(), seed_rule=SEED_RULE,
        csv_files={csv_name: digest}, flags=flags,
        timing_seconds=round(elapsed, 3),
        derived_seeds_head=[int(derive_seed(config.seed, i))
                            for i in range(n_seeds)],
        meta=meta)
    manifest.write(out_dir / f"{config.kind}.manifest.json")
    return manifest


def _head_seed_count(config: ExperimentConfig) -> int:
    for key in ("trials", "samples", "walk_trials"):
        if key in config.params and isinstance(config.params[key], int):
            return config.params[key]
    return 10
