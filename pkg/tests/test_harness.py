import json
from pathlib import Path

import numpy as np
import pytest

from perclab.cli import main as cli_main
from perclab.harness import (ConfigError, ExperimentConfig, RUNNERS, run,
                             write_csv)
from perclab.rng import derive_seed


def read(path):
    return Path(path).read_text()


def test_ball_stats_tree_contract(tmp_path):
    cfg = {"kind": "ball-stats", "seed": 5, "tree": {"ell": 3},
           "r_list": [4], "trials": 10, "out": str(tmp_path)}
    manifest = run(cfg)
    body = read(tmp_path / "ball-stats.csv")
    lines = body.strip().split("\n")
    assert len(lines) == 2                       # header + one row per r
    assert lines[0].startswith("r,volume")
    assert len(manifest.derived_seeds_head) == 10
    assert manifest.derived_seeds_head[0] == derive_seed(5, 0)
    mj = json.loads(read(tmp_path / "ball-stats.manifest.json"))
    assert mj["seed_rule"].startswith("trial_seed(i)")
    assert mj["csv_files"]["ball-stats.csv"] == manifest.csv_files["ball-stats.csv"]


def test_rerun_reproduces_csv_bytes(tmp_path):
    cfg = {"kind": "cluster-tail", "seed": 17, "tree": {"ell": 3},
           "n_list": [10, 100, 1000], "trials": 20000}
    a = dict(cfg, out=str(tmp_path / "a"))
    b = dict(cfg, out=str(tmp_path / "b"))
    run(a)
    run(b)
    assert read(tmp_path / "a/cluster-tail.csv") == read(tmp_path / "b/cluster-tail.csv")


def test_parallel_equals_serial(tmp_path):
    base = {"kind": "one-arm", "seed": 3, "lattice": {"d": 2, "p": 0.45},
            "r_list": [4, 8], "trials": 4000}
    run(dict(base, out=str(tmp_path / "serial"), threads=1))
    run(dict(base, out=str(tmp_path / "par"), threads=2))
    assert read(tmp_path / "serial/one-arm.csv") == read(tmp_path / "par/one-arm.csv")


def test_schema_rejections():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "nope", "seed": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "one-arm"})          # no seed
    with pytest.raises(ConfigError):
        run({"kind": "one-arm", "seed": 1, "tree": {"ell": 3},
             "r_list": [4], "trials": 0})                        # trials=0
    with pytest.raises(ConfigError):
        run({"kind": "one-arm", "seed": 1, "tree": {"ell": 3},
             "r_list": [], "trials": 5})                         # empty schedule
    with pytest.raises(ConfigError):
        run({"kind": "one-arm", "seed": 1, "r_list": [4], "trials": 5})


def test_every_kind_is_documented_in_cli():
    from perclab.cli import _CSV_COLUMNS_HELP
    assert set(_CSV_COLUMNS_HELP) == set(RUNNERS)


def test_write_csv_formatting(tmp_path):
    p = tmp_path / "t.csv"
    digest = write_csv(p, ["a", "b"], [(1, 0.5), (2, float(np.float64(1) / 3))])
    body = read(p)
    assert body == "a,b\n1,0.5\n2,0.3333333333333333\n"
    import hashlib
    assert digest == hashlib.sha256(body.encode()).hexdigest()


def test_cli_roundtrip_and_fit(tmp_path):
    out = str(tmp_path)
    rc = cli_main(["iic-tree", "--ell", "3", "--r-list", "4,8,16,32",
                   "--samples", "2000", "--seed", "11", "--out", out])
    assert rc == 0
    mj = json.loads(read(tmp_path / "iic-tree.manifest.json"))
    assert 1.5 < mj["meta"]["slope"] < 2.5
    rc = cli_main(["fit", "--input-csv", str(tmp_path / "iic-tree.csv"),
                   "--seed", "0", "--out", out])
    assert rc == 0
    body = read(tmp_path / "fit.csv").strip().split("\n")
    slope = float(body[1].split(",")[0])
    assert 1.5 < slope < 2.5


def test_cli_exit_codes(tmp_path):
    # schema: trials=0
    rc = cli_main(["one-arm", "--ell", "3", "--r-list", "4", "--trials", "0",
                   "--seed", "1", "--out", str(tmp_path)])
    assert rc == 1
    # missing model block
    rc = cli_main(["one-arm", "--r-list", "4", "--trials", "10", "--seed", "1",
                   "--out", str(tmp_path)])
    assert rc == 1
    # numeric failure: pc bracket with no crossing
    rc = cli_main(["pc-estimate", "--ell", "3", "--r-probe", "16",
                   "--trials", "2000", "--seed", "1", "--bracket", "0.7,0.9",
                   "--out", str(tmp_path)])
    assert rc == 3


def test_cli_config_file_with_overrides(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "kind": "cluster-tail", "seed": 9, "tree": {"ell": 3},
        "n_list": [10, 100], "trials": 5000}))
    rc = cli_main(["cluster-tail", "--config", str(cfg_path),
                   "--trials", "2000", "--out", str(tmp_path)])
    assert rc == 0
    mj = json.loads(read(tmp_path / "cluster-tail.manifest.json"))
    assert mj["config"]["trials"] == 2000       # flag overrode the file


def test_two_point_runner(tmp_path):
    cfg = {"kind": "two-point", "seed": 2, "lattice": {"d": 2, "p": 1.0},
           "x_list": [[1, 0], [2, 0]], "trials": 50, "out": str(tmp_path)}
    run(cfg)
    lines = read(tmp_path / "two-point.csv").strip().split("\n")
    assert len(lines) == 3
    assert lines[1].split(",")[2] == "1.0"      # p=1: always connected


def test_resistance_and_lanes_runners(tmp_path):
    cfg = {"kind": "resistance", "seed": 4, "tree": {"ell": 3},
           "r_list": [8], "samples": 20, "out": str(tmp_path)}
    m = run(cfg)
    assert m.flags["nw_violations"] == 0
    cfg2 = {"kind": "lanes", "seed": 4, "tree": {"ell": 3},
            "r_list": [8], "samples": 10, "out": str(tmp_path)}
    run(cfg2)
    lines = read(tmp_path / "lanes.csv").strip().split("\n")
    assert lines[0].startswith("r,mean_total_lanes")


def test_j_lambda_runner_monotone(tmp_path):
    cfg = {"kind": "j-lambda", "seed": 6, "tree": {"ell": 3},
           "r_list": [8], "lambda_list": [2.0, 8.0], "samples": 30,
           "out": str(tmp_path)}
    run(cfg)
    lines = read(tmp_path / "j-lambda.csv").strip().split("\n")[1:]
    freqs = [float(l.split(",")[2]) for l in lines]
    assert freqs[0] <= freqs[1]
