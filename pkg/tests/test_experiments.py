import pytest

from dtstar.experiments import (
    AXES,
    DEFAULT_LEVELS,
    SWEEP_FIELDS,
    level_label,
    rows_to_csv,
    run_jobs,
    scale_workspace,
    summarize,
    sweep_jobs,
    variant,
)
from dtstar.product import build_reduced_graph
from dtstar.scenario import load_scenario
from dtstar.workspace import ScenarioError

W3 = load_scenario("w3")


@pytest.mark.parametrize("size", [20, 30, 40, 50])
def test_scaled_grid_keeps_structure(size):
    w = scale_workspace(W3.workspace, size)
    assert (w.width, w.height) == (size, size)
    assert len(w.labeled_cells()) == len(W3.workspace.labeled_cells())
    assert w.initial not in w.obstacles
    # rack columns stay one cell thick
    for x, y in w.obstacles:
        assert (x + 1, y) not in w.obstacles
    build_reduced_graph(w, W3.automaton)


def test_scale_down_is_rejected():
    with pytest.raises(ScenarioError):
        scale_workspace(W3.workspace, 10)


def test_variants_touch_one_parameter():
    assert variant(W3, "arrival", (60, 12)).H == 60
    assert variant(W3, "arrival", (60, 12)).generator.arrival_std == 12
    assert variant(W3, "duration", (30, 10)).generator.duration_mean == 30
    assert variant(W3, "max-blocked", 4).generator.max_cells == 4
    assert variant(W3, "grid-size", 40).workspace.width == 40
    assert variant(W3, "objectives", (1, 2)).objectives == (1, 2)
    w1 = variant(W3, "propositions", "w1")
    assert w1.name == "w1" and w1.generator == W3.generator and w1.total_time == W3.total_time
    with pytest.raises(ScenarioError):
        variant(W3, "weather", 1)
    with pytest.raises(ScenarioError):
        variant(load_scenario("fig1"), "arrival", (60, 12))


def test_default_levels_cover_axes():
    assert set(DEFAULT_LEVELS) == set(AXES)
    assert level_label((60, 12)) == "60-12" and level_label("w1") == "w1"


def test_objectives_axis_runs_dtstar_only():
    jobs = sweep_jobs(W3, "objectives", [0, 1], ["greedy1", "dtstar"])
    assert {j.algorithm for j in jobs} == {"dtstar"} and len(jobs) == 6


def test_small_sweep_is_deterministic_and_ordered():
    base = W3.with_(total_time=120)
    jobs = sweep_jobs(base, "max-blocked", [0, 1], ["greedy1", "greedy2"], levels=[1, 2])
    serial = run_jobs(jobs, workers=1)
    parallel = run_jobs(jobs, workers=2)
    strip = [{k: v for k, v in r.items() if k != "replan_wall_mean"} for r in serial]
    assert strip == [{k: v for k, v in r.items() if k != "replan_wall_mean"} for r in parallel]
    assert [(r["level"], r["algorithm"], r["seed"]) for r in serial] == [
        (str(j.level), j.algorithm, j.seed) for j in jobs
    ]
    text = rows_to_csv(serial)
    assert text.splitlines()[0] == ",".join(SWEEP_FIELDS)
    summary = summarize(serial)
    assert len(summary) == 4 and all(r["runs"] == 2 for r in summary)
