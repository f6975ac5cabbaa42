"""Command-line entry points: one subcommand per experiment kind.

Every acceptance experiment is reproducible as a one-liner, e.g.::

    perclab one-arm --lattice-d 7 --p 0.0787 --r-list 8,16,32,64 \
        --trials 100000 --seed 7 --out results/

    perclab return-curve --ell 3 --n-list 100,1000,10000 --samples 50 \
        --seed 1 --out results/

Flags override values from ``--config``.  Exit codes: 0 clean, 1
usage/schema error, 2 resource guard tripped, 3 solver or numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import RUNNERS, ConfigError, ExperimentConfig, run
from .lattice import ResourceLimitError
from .resistance import SolverFailure

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RESOURCE = 2
EXIT_NUMERIC = 3

_CSV_COLUMNS_HELP = {
    "ball-stats": "r, volume, volume_stderr, h_prob, h_stderr, trials_ok",
    "one-arm": "r, h_prob, h_stderr, r_times_h, trials_ok",
    "cluster-tail": "n, p_gt_n, stderr, trials",
    "two-point": "norm, x, p_connect, stderr, trials",
    "triangle": "shell_radius, increment, partial_sum",
    "volume-recursion": "r, g_r, g_2r, ratio, stderr_ratio",
    "pc-estimate": "p_hat, uncertainty, r_probe, r_probe_2, trials",
    "iic-tree": "r, volume, stderr, samples",
    "iic-lattice": "r, volume, stderr, samples",
    "resistance": "r, median_reff, mean_reff, median_nw, median_reff_over_r, samples",
    "lanes": "r, mean_total_lanes, samples, rich_frac_lambda_*",
    "walk": "r, mean_tau, stderr, samples, walk_trials",
    "return-curve": "n, mean_p2n, stderr, samples_used",
    "j-lambda": "r, lambda, frequency, samples",
    "fit": "slope, stderr_slope, intercept, min_scale, max_scale, points",
}


def _int_list(text: str) -> list:
    return [int(t) for t in text.split(",") if t]


def _float_list(text: str) -> list:
    return [float(t) for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="perclab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in sorted(RUNNERS):
        sp = sub.add_parser(
            kind,
            help=f"writes {kind}.csv with columns: {_CSV_COLUMNS_HELP[kind]}",
            description=f"CSV columns: {_CSV_COLUMNS_HELP[kind]}")
        sp.add_argument("--config", help="JSON config file (flags override)")
        sp.add_argument("--out", help="output directory (default .)")
        sp.add_argument("--threads", type=int, help="worker processes")
        sp.add_argument("--seed", type=int, help="master seed (64-bit)")
        sp.add_argument("--ell", type=int, help="tree model: vertex degree")
        sp.add_argument("--lattice-d", type=int, help="lattice model: dimension")
        sp.add_argument("--edge-rule", choices=["nearest_neighbor", "spread_out"])
        sp.add_argument("--range-L", type=int, help="spread-out range L")
        sp.add_argument("--p", type=float, help="retention probability")
        sp.add_argument("--r-list", type=_int_list, help="comma separated radii")
        sp.add_argument("--n-list", type=_int_list, help="comma separated scales")
        sp.add_argument("--lambda-list", type=_float_list)
        sp.add_argument("--x-list", help="semicolon separated vertices, e.g. '1,0;2,0'")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--walk-trials", type=int)
        sp.add_argument("--r", type=int, help="single radius (iic-lattice)")
        sp.add_argument("--r-probe", type=int, help="crossing radius (pc-estimate)")
        sp.add_argument("--box-radius", type=int)
        sp.add_argument("--vertex-budget", type=int)
        sp.add_argument("--cap", type=int)
        sp.add_argument("--max-attempts", type=int)
        sp.add_argument("--bracket", type=_float_list, help="pc bracket lo,hi")
        sp.add_argument("--input-csv", help="curve to fit (fit subcommand)")
        sp.add_argument("--min-scale", type=float)
        sp.add_argument("--max-scale", type=float)
    return ap


def config_from_args(args: argparse.Namespace) -> dict:
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    raw["kind"] = args.kind
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["out"] = args.out
    if args.threads is not None:
        raw["threads"] = args.threads
    if args.ell is not None:
        raw.setdefault("tree", {})["ell"] = args.ell
        if args.p is not None:
            raw["tree"]["p"] = args.p
    if args.lattice_d is not None:
        lat = raw.setdefault("lattice", {})
        lat["d"] = args.lattice_d
        if args.edge_rule:
            lat["edge_rule"] = args.edge_rule
        if args.range_L is not None:
            lat["L"] = args.range_L
        if args.p is not None:
            lat["p"] = args.p
    simple = {"r_list": args.r_list, "n_list": args.n_list,
              "lambda_list": args.lambda_list, "trials": args.trials,
              "samples": args.samples, "walk_trials": args.walk_trials,
              "r": args.r, "r_probe": args.r_probe,
              "box_radius": args.box_radius,
              "vertex_budget": args.vertex_budget, "cap": args.cap,
              "max_attempts": args.max_attempts, "bracket": args.bracket,
              "input_csv": args.input_csv, "min_scale": args.min_scale,
              "max_scale": args.max_scale}
    for k, v in simple.items():
        if v is not None:
            raw[k] = v
    if args.x_list:
        raw["x_list"] = [[int(c) for c in part.split(",")]
                         for part in args.x_list.split(";")]
    return raw


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        raw = config_from_args(args)
        manifest = run(ExperimentConfig.from_dict(raw))
    except (ConfigError, OSError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as e:
        print(f"resource guard: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (SolverFailure, FloatingPointError, RuntimeError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    for name, digest in manifest.csv_files.items():
        print(f"wrote {name} (sha256 {digest[:12]}...) flags={manifest.flags}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
