import csv
from dataclasses import replace

import pytest

from lidar_cover.errors import NumericError, ValidationError
from lidar_cover.harness import (
    DEFAULT_CANDIDATES,
    KEY_COLUMNS,
    ExperimentConfig,
    SweepPlan,
    classical_baselines,
    compare_report,
    read_results,
    resolve_instance,
    run_experiment,
    sweep,
    write_report,
)


def small_config(tmp_path, **kw):
    base = dict(instances=["toy-1", "toy-2"], encoding="binary", alpha=[0.2, 1.5], sweeps=[200],
                seeds=[0, 1], reads=100, output=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


def test_empty_seed_list_rejected(tmp_path):
    with pytest.raises(ValidationError):
        small_config(tmp_path, seeds=[])


@pytest.mark.parametrize("kw", [{"instances": []}, {"reads": 0}, {"alpha": [0]},
                                {"encoding": "gray"}, {"decomposition": ("metis", 1)},
                                {"batches": 0}])
def test_config_validation(tmp_path, kw):
    with pytest.raises(ValidationError):
        small_config(tmp_path, **kw)


def test_defaults():
    cfg = ExperimentConfig(instances=["toy-1"])
    assert cfg.reads == 1000 and cfg.batches == 2 and len(cfg.seeds) == 10


def test_config_from_dict_rejects_unknown():
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({"instances": ["toy-1"], "bogus": 1})
    cfg = ExperimentConfig.from_dict({"instances": ["toy-1"],
                                      "decomposition": {"method": "kl", "levels": 1}})
    assert cfg.decomposition == ("kernighan_lin", 1)


def test_toy_1_alpha_rows(tmp_path):
    rows = run_experiment(small_config(tmp_path, instances=["toy-1"]))
    low = [r for r in rows if r["alpha"] == "0.2"]
    high = [r for r in rows if r["alpha"] == "1.5"]
    assert all(float(r["p_opt"]) == 0 for r in low)
    assert all(r["status"] == "no_feasible" for r in low)
    assert all(float(r["p_opt"]) > 0 and r["best_objective"] == "1" for r in high)


def test_toy_1_long_anneal_finds_optimum(tmp_path):
    rows = run_experiment(small_config(tmp_path, instances=["toy-1"], alpha=[1.5],
                                       sweeps=[10_000], seeds=[0]))
    assert float(rows[0]["p_opt"]) > 0


def test_resume_is_byte_identical(tmp_path):
    cfg = small_config(tmp_path)
    run_experiment(cfg)
    full = (tmp_path / "out" / "results.csv").read_text()
    # drop half the rows and resume
    lines = full.splitlines(keepends=True)
    (tmp_path / "out" / "results.csv").write_text("".join(lines[:1] + lines[1::2]))
    run_experiment(cfg)
    assert (tmp_path / "out" / "results.csv").read_text() == full
    # a fresh run with workers produces the same bytes
    fresh = replace(cfg, output=str(tmp_path / "fresh"), workers=3)
    run_experiment(fresh)
    assert (tmp_path / "fresh" / "results.csv").read_text() == full


def test_row_keys_unique(tmp_path):
    cfg = small_config(tmp_path)
    run_experiment(cfg)
    run_experiment(replace(cfg, decomposition=("spectral", 1)))
    rows = read_results(tmp_path / "out" / "results.csv")
    keys = [tuple(r[c] for c in KEY_COLUMNS) for r in rows]
    assert len(keys) == len(set(keys)) == 16


def test_cluster_infeasible_status(tmp_path):
    # the two street points are each seen only by the LiDAR across the cut
    graph = tmp_path / "g.json"
    from lidar_cover.graph import CoverageGraph
    g = CoverageGraph([(0, 0), (10, 0)], [(0.5, 0), (9.5, 0)], [[1], [0]], label="cross")
    graph.write_text(g.dumps())
    cfg = small_config(tmp_path, instances=[str(graph)], alpha=[1.5], seeds=[0],
                       decomposition=("vertical", 1))
    rows = run_experiment(cfg)
    assert rows[0]["status"] == "cluster_infeasible"
    assert rows[0]["s_p_rel"] == "5000.0000"


def test_decomposed_toy_1_is_two(tmp_path):
    rows = run_experiment(small_config(tmp_path, instances=["toy-1"], alpha=[1.5], seeds=[0],
                                       decomposition=("spectral", 1)))
    assert rows[0]["best_objective"] == "2" and rows[0]["optimum"] == "1"


def test_resolve_instance_forms(tmp_path):
    assert resolve_instance("toy-3").label == "toy-3"
    assert resolve_instance("real-1").num_lidars == 30
    assert resolve_instance({"toy": {"layers": 2, "street_rows": 1, "walls": 1}}).num_lidars == 2
    with pytest.raises(ValidationError):
        resolve_instance("real-404")


def test_sweep_single_candidate(tmp_path):
    plan = SweepPlan(axes=("alpha",), candidates={"alpha": [1.5]})
    best, trace = sweep(plan, small_config(tmp_path, instances=["toy-1"], seeds=[0]))
    assert best == {"alpha": 1.5} and len(trace) == 1


def test_sweep_picks_dominator(tmp_path):
    # alpha 0.2 never yields a feasible read on these instances
    plan = SweepPlan(axes=("alpha",), candidates={"alpha": [0.2, 1.5]},
                     defaults={"encoding": "binary", "alpha": 1.0, "chain_factor": 1.0,
                               "sweeps": 200})
    best, trace = sweep(plan, small_config(tmp_path, seeds=[0]))
    assert best["alpha"] == 1.5
    assert [t["chosen"] for t in trace] == [0, 1]


def test_sweep_tie_goes_to_earlier(tmp_path):
    plan = SweepPlan(axes=("chain_factor",), candidates={"chain_factor": [2.0, 0.5]},
                     defaults={"encoding": "binary", "alpha": 1.5, "chain_factor": 1.0,
                               "sweeps": 200})
    best, _ = sweep(plan, small_config(tmp_path, instances=["toy-1"], seeds=[0]))
    assert best["chain_factor"] == 2.0


def test_full_default_plan_trace(tmp_path):
    plan = SweepPlan()
    cfg = small_config(tmp_path, instances=["toy-1", "toy-3"], seeds=[0], reads=20)
    best, trace = sweep(plan, cfg)
    assert len(trace) == sum(len(v) for v in DEFAULT_CANDIDATES.values())
    assert [t["axis"] for t in trace] == [a for a in plan.axes for _ in plan.candidates[a]]
    assert set(best) == set(plan.axes)
    with open(tmp_path / "out" / "sweep_trace.csv") as fh:
        assert len(list(csv.DictReader(fh))) == len(trace)


def test_sweep_plan_validation():
    with pytest.raises(ValidationError):
        SweepPlan(axes=("temperature",))
    with pytest.raises(ValidationError):
        SweepPlan(axes=("alpha",), candidates={"alpha": []})


def test_compare_report(tmp_path):
    cfg = small_config(tmp_path, alpha=[1.5], seeds=[0])
    rows = run_experiment(cfg)
    rows = run_experiment(replace(cfg, decomposition=("spectral", 1)))
    rows = run_experiment(replace(cfg, decomposition=("spectral", 2)))
    baselines = classical_baselines(["toy-1", "toy-2"])
    baselines["default"] = {"select": {"decomposition": "none"}}
    baselines["dec1"] = {"select": {"decomposition": "spectral:1"}}
    baselines["dec2"] = {"select": {"decomposition": "spectral:2"}}
    table, plot = compare_report(rows, baselines)
    by = {r["instance"]: r for r in table}
    assert by["toy-1"]["default"] == by["toy-1"]["optimum"] == 1
    assert by["toy-1"]["dec1"] == 2
    assert all("dec1" in r and "dec2" in r for r in table)
    assert plot["x"] == ["toy-1", "toy-2"]
    assert set(plot["series"]) == {"optimum", "greedy", "default", "dec1", "dec2"}
    write_report(table, plot, tmp_path / "rep")
    assert (tmp_path / "rep" / "comparison_plot.json").exists()


def test_compare_report_missing_baseline(tmp_path):
    rows = run_experiment(small_config(tmp_path, instances=["toy-1"], alpha=[1.5], seeds=[0]))
    with pytest.raises(ValidationError, match="exact"):
        compare_report(rows, {"greedy": {"toy-1": 1}})
    with pytest.raises(ValidationError, match="optimized"):
        compare_report(rows, {"exact": {"toy-1": 1},
                              "optimized": {"select": {"sweeps": 999}}})


def test_compare_report_guards_below_optimum(tmp_path):
    rows = run_experiment(small_config(tmp_path, instances=["toy-1"], alpha=[1.5], seeds=[0]))
    with pytest.raises(NumericError):
        compare_report(rows, {"exact": {"toy-1": 2}, "run": {"select": {}}})
