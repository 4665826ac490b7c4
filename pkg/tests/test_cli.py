import csv
import json

from dtstar.cli import main, parse_seeds
from dtstar.smtlib import parse_smt


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_run_fig1(tmp_path, capsys):
    assert main(["run", "--scenario", "fig1", "--out", str(tmp_path), "--verify"]) == 0
    rows = {r["algorithm"]: r for r in read_csv(tmp_path / "metrics.csv")}
    assert {a: int(r["cycles"]) for a, r in rows.items()} == {"dtstar": 4, "greedy1": 2, "greedy2": 3}
    assert all(int(r["plans_verified"]) > 0 for r in rows.values())
    log = json.loads((tmp_path / "dtstar_seed0.json").read_text())
    assert [c["time"] for c in log["completions"]] == [26, 34, 42, 50]
    assert (tmp_path / "greedy1_seed0.csv").exists()
    assert "fig1 dtstar seed=0 cycles=4" in capsys.readouterr().out


def test_run_overrides_and_summary(tmp_path):
    smt = tmp_path / "m.smt2"
    code = main(
        ["run", "--scenario", "w1", "--algo", "greedy2", "--seeds", "0,3", "--total-time", "120",
         "--out", str(tmp_path), "--emit-smt", str(smt), "--horizon", "20"]
    )
    assert code == 0
    rows = read_csv(tmp_path / "metrics.csv")
    assert [r["seed"] for r in rows] == ["0", "3"] and rows[0]["total_time"] == "120"
    assert read_csv(tmp_path / "summary.csv")[0]["runs"] == "2"
    assert parse_smt(smt.read_text())


def test_parse_seeds():
    assert parse_seeds("3") == [0, 1, 2]
    assert parse_seeds("4,7") == [4, 7]


def test_bad_inputs_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--scenario", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["run", "--scenario", "fig1", "--algo", "astar", "--out", str(tmp_path)]) == 2
    assert main(["run", "--scenario", "fig1", "--seeds", "x", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--scenario", "w3", "--axis", "weather", "--out", str(tmp_path)]) == 2
    infeasible = tmp_path / "inf.json"
    infeasible.write_text(json.dumps({"grid": {"width": 3, "height": 3}, "labels": [{"cell": [0, 0], "props": ["p"]}], "initial": [1, 1]}))
    assert main(["run", "--scenario", str(infeasible), "--out", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_verify_plan(tmp_path, capsys):
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps({
        "grid": {"width": 3, "height": 1},
        "labels": [{"cell": [0, 0], "props": ["p"]}, {"cell": [2, 0], "props": ["d"]}],
        "initial": [1, 0],
    }))
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"cells": [[1, 0], [0, 0], [1, 0], [2, 0], [1, 0], [0, 0], [1, 0], [2, 0]], "loop_start": 3}))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"cells": [[1, 0], [0, 0], [1, 0], [0, 0]], "loop_start": 1}))
    assert main(["verify", "--scenario", str(scen), "--plan", str(good)]) == 0
    assert main(["verify", "--scenario", str(scen), "--plan", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "accepted" in out and "rejected" in out
    assert main(["verify", "--scenario", "fig1", "--algo", "dtstar"]) == 0


def test_dump_graph(tmp_path):
    smt = tmp_path / "m.smt2"
    assert main(["dump-graph", "--scenario", "fig1", "--out", str(tmp_path), "--horizon", "10", "--emit-smt", str(smt)]) == 0
    g = json.loads((tmp_path / "graph.json").read_text())
    assert g["nodes"] and g["edges"]
    costs = (tmp_path / "costs.csv").read_text().splitlines()
    assert costs[0].startswith("from_x") and len(costs) == 1 + 11 * len(g["edges"])
    assert parse_smt(smt.read_text())


def test_small_sweep(tmp_path):
    code = main(
        ["sweep", "--scenario", "w3", "--axis", "duration", "--levels", "30,10;50,15", "--algo", "greedy1",
         "--seeds", "2", "--total-time", "100", "--workers", "1", "--out", str(tmp_path)]
    )
    assert code == 0
    rows = read_csv(tmp_path / "sweep_duration.csv")
    assert len(rows) == 4 and {r["level"] for r in rows} == {"30-10", "50-15"}
    assert len(read_csv(tmp_path / "sweep_duration_summary.csv")) == 2
