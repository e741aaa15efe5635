import csv
import json

import pytest

from riskq import oracle
from riskq.cli import SWEEP_HEADER, main
from riskq.model import ModelParams

DESK = ["--B", "3", "--p", "0.75", "--gamma", "1", "--C", "0.1", "--R", "1", "--L", "2"]


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def desk_cfg(**model):
    base = {"B": 3, "p": 0.75, "C": 0.1, "R": 1.0, "L": 2.0, "gamma": 1.0}
    base.update(model)
    return {"model": base}


def test_solve_matches_enumeration(tmp_path, capsys):
    out = str(tmp_path / "r.json")
    code, stdout, _ = run(["solve", *DESK, "--out", out], capsys)
    assert code == 0 and "alpha" in stdout
    rep = json.loads(open(out).read())
    assert rep["schema_version"] == 1 and rep["command"] == "solve"
    assert {"version", "wall_time_s", "params", "config", "results"} <= rep.keys()
    v = oracle.enumerate_policies(ModelParams(3, 0.75, 0.1, 1.0, 2.0, 1.0))
    assert abs(rep["results"]["alpha"] - v.best_alpha) <= 1e-8 * v.best_alpha
    assert rep["results"]["threshold"] == v.threshold


def test_report_round_trip(tmp_path, capsys):
    first, second = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert run(["solve", *DESK, "--out", first, "--quiet"], capsys)[0] == 0
    assert run(["solve", "--config", first, "--out", second, "--quiet"], capsys)[0] == 0
    a, b = json.load(open(first)), json.load(open(second))
    assert a["results"] == b["results"] and a["params"] == b["params"]


def test_quiet(capsys):
    code, stdout, _ = run(["solve", *DESK, "--quiet"], capsys)
    assert code == 0 and stdout == ""


def test_flags_override_config(tmp_path, capsys):
    cfg = write(tmp_path, desk_cfg(C=5.0))
    out = str(tmp_path / "r.json")
    run(["solve", "--config", cfg, "--C", "0.1", "--out", out, "--quiet"], capsys)
    assert json.load(open(out))["params"]["C"] == 0.1


def test_rates_resolve_to_p(tmp_path, capsys):
    cfg = desk_cfg(p=None)
    cfg["model"].update({"lambda": 1.0, "mu": 3.0})
    out = str(tmp_path / "r.json")
    code, _, _ = run(["solve", "--config", write(tmp_path, cfg), "--out", out, "--quiet"], capsys)
    assert code == 0 and json.load(open(out))["params"]["p"] == 0.75


@pytest.mark.parametrize(
    "doc,needle",
    [
        ('{"model": {"B": 3,', "cfg.json:1"),
        ("[1, 2]", "top level"),
        (desk_cfg(R=None), "model.R"),
        (desk_cfg(B=2.5), "model.B"),
        (desk_cfg(gamma="one"), "model.gamma"),
        (desk_cfg(p=1.5), "model"),
        ({"model": {"B": 3, "p": 0.5, "lambda": 1.0, "mu": 1.0, "C": 1, "R": 1, "L": 1, "gamma": 1}}, "exactly one"),
        ({}, "model"),
    ],
)
def test_malformed_config_exits_2(tmp_path, capsys, doc, needle):
    code, _, err = run(["solve", "--config", write(tmp_path, doc)], capsys)
    assert code == 2
    assert needle in err


def test_missing_config_file(capsys):
    code, _, err = run(["solve", "--config", "/nonexistent/cfg.json"], capsys)
    assert code == 2 and "cannot read" in err


def test_numeric_failure_exits_4(capsys):
    code, _, err = run(["solve", *DESK, "--max-iters", "2"], capsys)
    assert code == 4 and "numeric failure" in err


def test_eval_threshold(tmp_path, capsys):
    out = str(tmp_path / "r.json")
    code, stdout, _ = run(["eval-threshold", *DESK, "--tau", "2", "--out", out], capsys)
    res = json.load(open(out))["results"]
    assert code == 0 and res["tau"] == 2 and res["boundary_residual"] < 1e-8
    assert run(["eval-threshold", *DESK, "--tau", "9"], capsys)[0] == 2
    assert run(["eval-threshold", *DESK], capsys)[0] == 2


def test_interval_then_solve_midpoint(tmp_path, capsys):
    out = str(tmp_path / "r.json")
    assert run(["interval", *DESK, "--tau", "1", "--out", out, "--quiet"], capsys)[0] == 0
    res = json.load(open(out))["results"]
    mid = 0.5 * (res["c_lower"] + res["c_upper"])
    solve_out = str(tmp_path / "s.json")
    assert run(["solve", *DESK, "--C", repr(mid), "--out", solve_out, "--quiet"], capsys)[0] == 0
    assert json.load(open(solve_out))["results"]["threshold"] == 1


def test_interval_without_cost(tmp_path, capsys):
    cfg = desk_cfg()
    del cfg["model"]["C"]
    cfg["interval"] = {"tau": 1}
    assert run(["interval", "--config", write(tmp_path, cfg), "--quiet"], capsys)[0] == 0


def test_sweep_csv(tmp_path, capsys):
    csv_path, out = str(tmp_path / "s.csv"), str(tmp_path / "r.json")
    grid = ",".join(repr(round(0.05 * k, 2)) for k in range(1, 41))
    code, _, _ = run(["sweep", *DESK, "--C-grid", grid, "--csv", csv_path, "--out", out, "--quiet"], capsys)
    assert code == 0
    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == SWEEP_HEADER
    rep = json.load(open(out))["results"]["rows"]
    assert len(rows) == 41
    taus = [int(r[1]) for r in rows[1:]]
    assert taus == sorted(taus)
    for r, j in zip(rows[1:], rep):
        assert float(r[0]) == j["C"] and float(r[2]) == j["alpha"] and float(r[3]) == j["rs_cost"]
        assert int(r[4]) == j["iterations"]


def test_sweep_grid_forms(tmp_path, capsys):
    cfg = desk_cfg()
    cfg["sweep"] = {"C_grid": [0.1, 0.5, 1.0]}
    assert run(["sweep", "--config", write(tmp_path, cfg), "--quiet"], capsys)[0] == 0
    cfg["sweep"] = {"C_grid": "0.1,0.5"}
    assert run(["sweep", "--config", write(tmp_path, cfg)], capsys)[0] == 2
    assert run(["sweep", *DESK, "--C-grid", "0.5,0.1"], capsys)[0] == 2
    code, stdout, _ = run(["sweep", *DESK, "--C-grid", "0.05:2.0:5"], capsys)
    assert code == 0 and stdout.count("\n") == 6


@pytest.mark.parametrize("policy", ["optimal", "threshold:2", "[0, 1, 1, 1]"])
def test_simulate_policies(tmp_path, capsys, policy):
    out = str(tmp_path / "r.json")
    args = ["simulate", *DESK, "--gamma", "0.2", "--policy", policy, "--replications", "20000", "--seed", "3"]
    code, _, _ = run([*args, "--out", out, "--quiet"], capsys)
    res = json.load(open(out))["results"]
    assert code == 0 and abs(res["z_score"]) < 4
    run([*args, "--out", out + "2", "--quiet"], capsys)
    again = json.load(open(out + "2"))["results"]
    assert again["mean_exp_moment"] == res["mean_exp_moment"]


@pytest.mark.parametrize("policy", ["threshold:0", "[0, 1]", "[0, 2, 1, 1]", "sometimes"])
def test_simulate_bad_policy(capsys, policy):
    assert run(["simulate", *DESK, "--policy", policy, "--replications", "10"], capsys)[0] == 2


def test_verify_desk_and_fault(capsys):
    code, stdout, _ = run(["verify", *DESK], capsys)
    assert code == 0 and "1/1 models pass" in stdout
    code, stdout, _ = run(["verify", *DESK, "--inject-kernel-fault"], capsys)
    assert code == 3 and "FAIL  kernel rows sum to 1" in stdout


def test_verify_needs_models(capsys):
    assert run(["verify"], capsys)[0] == 2


def test_verify_small_grid(tmp_path, capsys):
    out = str(tmp_path / "v.json")
    code, _, _ = run(["verify", "--grid", "5", "--grid-seed", "9", "--out", out, "--quiet"], capsys)
    res = json.load(open(out))["results"]
    assert code == 0 and res["n_models"] == 5 and res["n_failed"] == 0
