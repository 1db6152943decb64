"""Experiment grids, one-axis-at-a-time hyperparameter sweeps and reports.

Results live in ``<output>/results.csv`` keyed by
(instance, encoding, alpha, chain_factor, sweeps, decomposition, seed_group).
Rows already present are kept verbatim and skipped, and the file is always
rewritten in canonical key order, so an interrupted run resumes to the same
bytes.
"""

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from lidar_cover.decompose import METHODS, merge_solutions, recursive_decompose
from lidar_cover.errors import NumericError, ValidationError
from lidar_cover.graph import CoverageGraph, build_coverage_graph
from lidar_cover.metrics import SAMPLE_CAP, evaluate
from lidar_cover.qubo import ENCODINGS, build_qubo
from lidar_cover.sampler import SampleRecord, SampleSet, SamplerParams, mix, sample_sa
from lidar_cover.scene import Scene, generate_real, generate_toy, toy_instance
from lidar_cover.solvers import best_feasible, solve_exact, solve_greedy

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "instance", "encoding", "alpha", "chain_factor", "sweeps", "decomposition", "seed_group",
    "status", "best_objective", "optimum", "p_opt", "s_p", "p_opt_rel", "s_p_rel", "tts",
    "ci_low", "ci_high", "reads", "low_significance",
)
KEY_COLUMNS = RESULT_COLUMNS[:7]
AXES = ("encoding", "alpha", "chain_factor", "sweeps")
DEFAULT_CANDIDATES = {
    "encoding": ["one_hot", "binary"],
    "alpha": [0.1, 0.2, 0.5, 1.0, 1.5, 2.0, 5.0, 10.0],
    "chain_factor": [0.2, 0.5, 1.0, 2.0],
    "sweeps": [50, 100, 200, 500, 1000],
}
DEFAULT_VALUES = {"encoding": "one_hot", "alpha": 1.0, "chain_factor": 1.0, "sweeps": 100}


# --- instances ---------------------------------------------------------------

def resolve_instance(spec):
    """Coverage graph for an instance spec.

    Accepted forms: ``"toy-<n>"``, a bundled template name such as
    ``"real-3"``, a path to a scene or graph JSON file, or a dict with
    ``toy`` / ``real`` / ``scene`` / ``graph`` keys.
    """
    if isinstance(spec, dict):
        if "toy" in spec:
            return build_coverage_graph(generate_toy(**spec["toy"]))
        if "real" in spec:
            return build_coverage_graph(generate_real(**spec["real"]))
        if "scene" in spec:
            return resolve_instance(spec["scene"])
        if "graph" in spec:
            return resolve_instance(spec["graph"])
        raise ValidationError(f"unrecognised instance spec {spec!r}", field="instances")
    spec = str(spec)
    if spec.startswith("toy-") and spec[4:].isdigit():
        return build_coverage_graph(toy_instance(int(spec[4:])))
    path = Path(spec)
    if path.suffix == ".json" and path.is_file():
        data = json.loads(path.read_text())
        if "neighbors" in data:
            graph = CoverageGraph.from_dict(data)
        else:
            graph = build_coverage_graph(Scene.from_dict(data))
        return replace(graph, label=spec)
    return replace(build_coverage_graph(generate_real(spec)), label=spec)


def instance_label(spec):
    if isinstance(spec, dict):
        return json.dumps(spec, sort_keys=True)
    return str(spec)


# --- configuration -----------------------------------------------------------

def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass(frozen=True)
class ExperimentConfig:
    instances: tuple
    encoding: tuple = ("binary",)
    alpha: tuple = (0.2,)
    sweeps: tuple = (500,)
    chain_factor: tuple = (1.0,)
    reads: int = 1000
    batches: int = 2
    seeds: tuple = tuple(range(10))
    decomposition: tuple = None  # (method, levels)
    output: str = "results"
    beta_schedule: tuple = None
    exact_time_limit: float = 60.0
    record_timing: bool = False
    workers: int = 1

    def __post_init__(self):
        for name in ("instances", "encoding", "alpha", "sweeps", "chain_factor", "seeds"):
            value = tuple(_as_list(getattr(self, name)))
            object.__setattr__(self, name, value)
            if not value:
                raise ValidationError("must not be empty", field=name)
        for enc in self.encoding:
            if enc not in ENCODINGS:
                raise ValidationError(f"unknown encoding {enc!r}", field="encoding")
        if any(not a > 0 for a in self.alpha):
            raise ValidationError("penalty weights must be > 0", field="alpha")
        if any(not (isinstance(s, int) and s >= 1) for s in self.sweeps):
            raise ValidationError("sweeps must be integers >= 1", field="sweeps")
        if not (isinstance(self.reads, int) and self.reads >= 1):
            raise ValidationError(f"must be an integer >= 1, got {self.reads!r}", field="reads")
        if not (isinstance(self.batches, int) and 1 <= self.batches <= self.reads):
            raise ValidationError("must lie in 1..reads", field="batches")
        if self.decomposition is not None:
            method, levels = self.decomposition
            if method == "kl":
                method = "kernighan_lin"
            if method not in METHODS:
                raise ValidationError(f"unknown method {method!r}", field="decomposition")
            object.__setattr__(self, "decomposition", (method, int(levels)))

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        if data.get("decomposition") is not None:
            dec = data["decomposition"]
            if isinstance(dec, dict):
                dec = (dec["method"], dec["levels"])
            data["decomposition"] = tuple(dec)
        if data.get("beta_schedule") is not None:
            data["beta_schedule"] = tuple(data["beta_schedule"])
        if "instances" not in data:
            raise ValidationError("missing", field="instances")
        return cls(**data)

    def decomposition_tag(self):
        if self.decomposition is None:
            return "none"
        method, levels = self.decomposition
        return f"{method}:{levels}"


def _fmt(value):
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def _key(row):
    return tuple(row[c] for c in KEY_COLUMNS)


def _sort_key(row):
    return (
        row["instance"], row["encoding"], float(row["alpha"]), float(row["chain_factor"]),
        int(row["sweeps"]), row["decomposition"], int(row["seed_group"]),
    )


def read_results(path):
    path = Path(path)
    if not path.is_file():
        return []
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def format_results(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in sorted(rows, key=_sort_key):
        writer.writerow({c: row.get(c, "") for c in RESULT_COLUMNS})
    return buf.getvalue()


# --- a single grid cell --------------------------------------------------------

def _batched_samples(qubo, config, sweeps, seed, chain_factor):
    sizes = [len(c) for c in np.array_split(np.arange(config.reads), config.batches)]
    sets = []
    for b, size in enumerate(sizes):
        params = SamplerParams(
            reads=size,
            sweeps=sweeps,
            beta_schedule=config.beta_schedule,
            seed=mix(seed, b),
            passthrough={"chain_strength_factor": chain_factor},
        )
        sets.append(sample_sa(qubo, params))
    return SampleSet.merge(sets)


def _merge_reads(partition, cluster_sets):
    """Combine the r-th read of every cluster into one read of the parent."""
    parent = partition.parent
    reads = min(len(s) for s in cluster_sets)
    by_read = [sorted(s.records, key=lambda r: r.read) for s in cluster_sets]
    records = []
    for r in range(reads):
        x = [0] * parent.num_lidars
        energy = 0.0
        for cluster, recs in zip(partition.clusters, by_read):
            rec = recs[r]
            energy += rec.energy
            for l in range(cluster.num_lidars):
                if rec.assignment[l]:
                    x[cluster.lidar_ids[l]] = 1
        feasible = all(any(x[l] for l in ns) for ns in parent.neighbors)
        records.append(SampleRecord(r, tuple(x), energy, sum(x), feasible))
    records.sort(key=lambda rec: (rec.energy, rec.read))
    first = cluster_sets[0]
    t = sum(s.wall_time_per_read for s in cluster_sets)
    return SampleSet(tuple(records), first.params, parent.label, parent.num_lidars,
                     parent.num_lidars, parent.neighbors, t)


def run_cell(graph, optimum, config, encoding, alpha, chain_factor, sweeps, seed,
             instance=None):
    """Sample one (instance, parameter point, seed) cell and score it."""
    row = {
        "instance": instance or graph.label,
        "encoding": encoding,
        "alpha": _fmt(float(alpha)),
        "chain_factor": _fmt(float(chain_factor)),
        "sweeps": str(sweeps),
        "decomposition": config.decomposition_tag(),
        "seed_group": str(seed),
        "optimum": str(optimum),
        "reads": str(config.reads),
    }
    if config.decomposition is None:
        samples = _batched_samples(build_qubo(graph, encoding, alpha), config, sweeps, seed,
                                   chain_factor)
        best = best_feasible(samples)
    else:
        method, levels = config.decomposition
        partition = recursive_decompose(graph, levels, method)
        if not all(c.feasible for c in partition.clusters):
            bad = [k for k, c in enumerate(partition.clusters) if not c.feasible]
            log.info("%s: clusters %s infeasible", row["instance"], bad)
            row.update(status="cluster_infeasible", best_objective="", p_opt="0.000000",
                       s_p=f"{SAMPLE_CAP:.4f}", p_opt_rel="0.000000", s_p_rel=f"{SAMPLE_CAP:.4f}",
                       tts="", ci_low="", ci_high="", low_significance="1")
            return row
        cluster_sets = []
        for k, cluster in enumerate(partition.clusters):
            qubo = build_qubo(cluster, encoding, alpha)
            cluster_sets.append(_batched_samples(qubo, config, sweeps, mix(seed, 1000 + k),
                                                 chain_factor))
        samples = _merge_reads(partition, cluster_sets)
        # best objective: union of every cluster's best feasible read; the
        # read-wise merge above only feeds the success-probability metrics
        subsolutions = [best_feasible(s) for s in cluster_sets]
        best = None
        if all(s is not None for s in subsolutions):
            best = merge_solutions(partition, subsolutions)
            if not best.feasible:
                raise NumericError(f"{row['instance']}: merged solution infeasible")
    t_s = samples.wall_time_per_read if config.record_timing else None
    report = evaluate(samples, optimum, t_s=t_s, seed=seed)
    if best is not None and best.objective < optimum:
        raise NumericError(f"{row['instance']}: sampled objective {best.objective} "
                           f"below proven optimum {optimum}")
    metrics = report.row(row["instance"], encoding, alpha, sweeps, seed)
    row.update(
        status="ok" if best is not None else "no_feasible",
        best_objective="" if best is None else str(best.objective),
        p_opt=metrics["p_opt"],
        s_p=metrics["s_p"],
        p_opt_rel=metrics["p_opt_rel"],
        s_p_rel=metrics["s_p_rel"],
        tts=metrics["tts"],
        ci_low=metrics["ci_low"],
        ci_high=metrics["ci_high"],
        low_significance=str(int(report.low_significance)),
    )
    return row


# --- grids -------------------------------------------------------------------

_OPTIMA = {}


def exact_optimum(graph, time_limit=60.0):
    key = (graph.label, graph.neighbors)
    if key not in _OPTIMA:
        sol = solve_exact(graph, time_limit=time_limit)
        if not sol.proven:
            log.warning("%s: exact search hit the time limit; optimum not proven", graph.label)
        _OPTIMA[key] = sol.objective
    return _OPTIMA[key]


def run_experiment(config):
    """Run every missing (instance, parameter point, seed) cell of ``config``.

    Returns the complete, canonically ordered list of result rows (existing
    and new) and rewrites ``<output>/results.csv``.
    """
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "results.csv"
    rows = read_results(path)
    done = {_key(r) for r in rows}
    tag = config.decomposition_tag()

    jobs = []
    for spec in config.instances:
        label = instance_label(spec)
        graph = None
        for enc in config.encoding:
            for alpha in config.alpha:
                for chain in config.chain_factor:
                    for sweeps in config.sweeps:
                        for seed in config.seeds:
                            key = (label, enc, _fmt(float(alpha)), _fmt(float(chain)),
                                   str(sweeps), tag, str(seed))
                            if key in done:
                                continue
                            done.add(key)
                            if graph is None:
                                graph = resolve_instance(spec)
                                if not graph.feasible:
                                    raise_infeasible(graph)
                                optimum = exact_optimum(graph, config.exact_time_limit)
                            jobs.append((graph, optimum, enc, alpha, chain, sweeps, seed, label))

    def work(job):
        graph, optimum, enc, alpha, chain, sweeps, seed, label = job
        return run_cell(graph, optimum, config, enc, alpha, chain, sweeps, seed, instance=label)

    if config.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            new_rows = list(pool.map(work, jobs))
    else:
        new_rows = [work(job) for job in jobs]
    rows.extend(new_rows)
    text = format_results(rows)
    path.write_text(text)
    log.info("wrote %d rows (%d new) to %s", len(rows), len(new_rows), path)
    return list(csv.DictReader(io.StringIO(text)))


def raise_infeasible(graph):
    from lidar_cover.errors import InfeasibleError

    bad = graph.uncoverable()
    raise InfeasibleError(f"{graph.label}: uncoverable street points {bad}", street_ids=bad)


# --- one-axis-at-a-time sweep ----------------------------------------------------

@dataclass(frozen=True)
class SweepPlan:
    axes: tuple = AXES
    candidates: dict = field(default_factory=lambda: dict(DEFAULT_CANDIDATES))
    defaults: dict = field(default_factory=lambda: dict(DEFAULT_VALUES))
    objective: str = "s_p_rel"

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        for axis in self.axes:
            if axis not in AXES:
                raise ValidationError(f"unknown axis {axis!r}", field="axes")
            if not self.candidates.get(axis):
                raise ValidationError(f"no candidates for axis {axis!r}", field="candidates")
        if len(set(self.axes)) != len(self.axes):
            raise ValidationError("axes must be distinct", field="axes")
        if self.objective not in ("s_p", "s_p_rel"):
            raise ValidationError(f"unknown objective {self.objective!r}", field="objective")

    @classmethod
    def from_dict(cls, data):
        candidates = dict(DEFAULT_CANDIDATES)
        candidates.update(data.get("candidates", {}))
        defaults = dict(DEFAULT_VALUES)
        defaults.update(data.get("defaults", {}))
        axes = data.get("axes", [a for a in AXES if a in data.get("candidates", AXES)])
        return cls(tuple(axes), candidates, defaults, data.get("objective", "s_p_rel"))


def _mean_objective(rows, objective):
    return float(np.mean([float(r[objective]) for r in rows]))


def sweep(plan, config):
    """Fix the axes one at a time, each to the candidate minimizing the mean objective.

    Returns ``(best, trace)``: the chosen value per axis and one trace row
    per (axis, candidate). Ties go to the earlier candidate.
    """
    fixed = {}
    trace = []
    for axis in plan.axes:
        scores = []
        for candidate in plan.candidates[axis]:
            point = {a: fixed.get(a, plan.defaults[a]) for a in AXES}
            point[axis] = candidate
            cfg = replace(config, **{a: (point[a],) for a in AXES})
            rows = run_experiment(cfg)
            selected = [r for r in rows if _matches(r, cfg)]
            score = _mean_objective(selected, plan.objective)
            scores.append(score)
            trace.append({"axis": axis, "candidate": _fmt(candidate), "objective": score,
                          "rows": len(selected)})
        best_idx = int(np.argmin(scores))
        fixed[axis] = plan.candidates[axis][best_idx]
        for k, row in enumerate(trace[-len(scores):]):
            row["chosen"] = int(k == best_idx)
    out = Path(config.output)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["axis", "candidate", "objective", "rows", "chosen"],
                            lineterminator="\n")
    writer.writeheader()
    for row in trace:
        writer.writerow({**row, "objective": f"{row['objective']:.4f}"})
    (out / "sweep_trace.csv").write_text(buf.getvalue())
    (out / "sweep_best.json").write_text(json.dumps(fixed, indent=2, sort_keys=True) + "\n")
    return fixed, trace


def _matches(row, cfg):
    labels = {instance_label(s) for s in cfg.instances}
    return (
        row["instance"] in labels
        and row["encoding"] in cfg.encoding
        and float(row["alpha"]) in {float(a) for a in cfg.alpha}
        and float(row["chain_factor"]) in {float(c) for c in cfg.chain_factor}
        and int(row["sweeps"]) in set(cfg.sweeps)
        and row["decomposition"] == cfg.decomposition_tag()
        and int(row["seed_group"]) in {int(s) for s in cfg.seeds}
    )


# --- comparison report ---------------------------------------------------------

def select_rows(rows, selector):
    """Rows whose columns equal every (column, value) pair of ``selector``."""
    out = []
    for r in rows:
        ok = True
        for col, want in selector.items():
            have = r.get(col)
            if col in ("alpha", "chain_factor"):
                ok = have is not None and math.isclose(float(have), float(want))
            else:
                ok = have == str(want)
            if not ok:
                break
        if ok:
            out.append(r)
    return out


def compare_report(results, baselines, instances=None):
    """Best feasible objective per instance and method next to the exact optimum.

    ``baselines`` maps method names to either ``{instance: objective}`` dicts
    (classical solvers; ``"exact"`` is required) or ``{"select": {...}}``
    row selectors over ``results`` (sampler runs). Returns ``(table, plot)``
    where ``plot`` has ``x`` (instance labels) and one series per method.
    """
    if "exact" not in baselines:
        raise ValidationError("missing baseline 'exact'", field="baselines")
    if instances is None:
        instances = sorted({r["instance"] for r in results})
    methods = [m for m in baselines if m != "exact"]
    table = []
    for inst in instances:
        if inst not in baselines["exact"]:
            raise ValidationError(f"baseline 'exact' has no value for {inst}", field="baselines")
        optimum = int(baselines["exact"][inst])
        row = {"instance": inst, "optimum": optimum}
        for m in methods:
            spec = baselines[m]
            if "select" in spec:
                hits = select_rows(results, {**spec["select"], "instance": inst})
                if not hits:
                    raise ValidationError(f"baseline {m!r} has no rows for {inst}",
                                          field="baselines")
                objs = [int(r["best_objective"]) for r in hits if r["best_objective"] != ""]
                value = min(objs) if objs else None
            else:
                if inst not in spec:
                    raise ValidationError(f"baseline {m!r} has no value for {inst}",
                                          field="baselines")
                value = int(spec[inst])
            if value is not None and value < optimum:
                raise NumericError(f"{m} reports {value} below the optimum {optimum} on {inst}")
            row[m] = value
        table.append(row)
    plot = {
        "x": list(instances),
        "series": {m: [row[m] for row in table] for m in ["optimum"] + methods},
    }
    return table, plot


def format_report(table):
    if not table:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(table[0]), lineterminator="\n")
    writer.writeheader()
    for row in table:
        writer.writerow({k: "" if v is None else v for k, v in row.items()})
    return buf.getvalue()


def classical_baselines(instances, time_limit=60.0):
    exact, greedy = {}, {}
    for spec in instances:
        label = instance_label(spec)
        graph = resolve_instance(spec)
        exact[label] = exact_optimum(graph, time_limit)
        greedy[label] = solve_greedy(graph).objective
    return {"exact": exact, "greedy": greedy}


def write_report(table, plot, out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.csv").write_text(format_report(table))
    (out / "comparison_plot.json").write_text(json.dumps(plot, indent=2, sort_keys=True) + "\n")
