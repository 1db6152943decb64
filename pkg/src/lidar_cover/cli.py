"""Command-line entry point: ``lidar-cover <subcommand> ...``.

Exit codes: 0 success, 1 validation error, 2 infeasible instance,
3 internal numeric failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from lidar_cover import harness
from lidar_cover.decompose import recursive_decompose, vertical_cut
from lidar_cover.errors import InfeasibleError, NumericError, ValidationError
from lidar_cover.graph import CoverageGraph, build_coverage_graph
from lidar_cover.qubo import ENCODINGS, Qubo, build_qubo
from lidar_cover.sampler import SamplerParams, sample_sa
from lidar_cover.scene import Scene, generate_real, generate_toy, toy_instance
from lidar_cover.solvers import solve_exact, solve_greedy

EXIT_OK, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 1, 2, 3


def _read(path):
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc


def _load_json(path):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg})") from exc


def _emit(args, name, text):
    """Write to ``--out DIR/name`` when an output directory is given, else stdout."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


def _load_graph(path):
    data = _load_json(path)
    if "neighbors" in data:
        return CoverageGraph.from_dict(data)
    return build_coverage_graph(Scene.from_dict(data))


def cmd_generate(args):
    if args.kind == "toy":
        if args.number is not None:
            scene = toy_instance(args.number, args.layer_spacing, args.range or 2.5)
        else:
            if args.layers is None:
                raise ValidationError("give --number or --layers", field="layers")
            scene = generate_toy(args.layers, args.rows, args.walls, args.layer_spacing,
                                 args.range or 2.5)
    else:
        hall = _load_json(args.hall) if args.hall.endswith(".json") else args.hall
        scene = generate_real(hall, args.lidar_spacing, args.density_ratio, args.range)
    _emit(args, "scene.json", scene.dumps())


def cmd_graph(args):
    scene = Scene.from_dict(_load_json(args.scene))
    graph = build_coverage_graph(scene)
    if not graph.feasible:
        bad = graph.uncoverable()
        raise InfeasibleError(f"uncoverable street points {bad}", street_ids=bad)
    _emit(args, "graph.json", graph.dumps())


def cmd_qubo(args):
    graph = _load_graph(args.graph)
    _emit(args, "qubo.txt", build_qubo(graph, args.encoding, args.alpha).dumps())


def cmd_solve(args):
    graph = _load_graph(args.graph)
    if args.method == "exact":
        sol = solve_exact(graph, time_limit=args.time_limit)
    else:
        sol = solve_greedy(graph)
    data = {
        "method": args.method,
        "active_lidars": list(sol.active_lidars),
        "objective": sol.objective,
        "feasible": sol.feasible,
        "proven": sol.proven,
    }
    _emit(args, "solution.json", json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_sample(args):
    text = _read(args.input)
    if text.lstrip().startswith("qubo"):
        qubo = Qubo.loads(text)
    else:
        qubo = build_qubo(_load_graph(args.input), args.encoding, args.alpha)
    params = SamplerParams(reads=args.reads, sweeps=args.sweeps, seed=args.seed)
    samples = sample_sa(qubo, params, workers=args.workers)
    _emit(args, "samples.csv", samples.to_csv(include_timing=args.timing))


def cmd_decompose(args):
    graph = _load_graph(args.graph)
    method = "kernighan_lin" if args.method == "kl" else args.method
    if method == "vertical" and args.levels == 1:
        partition = vertical_cut(graph)
    else:
        partition = recursive_decompose(graph, args.levels, method)
    _emit(args, "partition.json", partition.dumps())


def _config(path, args):
    data = _load_json(path)
    if args.out:
        data["output"] = args.out
    if args.workers > 1:
        data["workers"] = args.workers
    return harness.ExperimentConfig.from_dict(data)


def cmd_run(args):
    config = _config(args.config, args)
    rows = harness.run_experiment(config)
    print(f"{len(rows)} rows in {Path(config.output) / 'results.csv'}")


def cmd_sweep(args):
    data = _load_json(args.plan)
    if "config" not in data:
        raise ValidationError("plan file needs a 'config' object", field="config")
    config_data = data.pop("config")
    if args.out:
        config_data["output"] = args.out
    if args.workers > 1:
        config_data["workers"] = args.workers
    config = harness.ExperimentConfig.from_dict(config_data)
    best, trace = harness.sweep(harness.SweepPlan.from_dict(data), config)
    print(json.dumps(best, sort_keys=True))


def cmd_report(args):
    spec = _load_json(args.spec)
    results = harness.read_results(spec.get("results", Path(args.out or ".") / "results.csv"))
    if not results:
        raise ValidationError("no result rows to report on", field="results")
    instances = spec.get("instances") or sorted({r["instance"] for r in results})
    baselines = harness.classical_baselines(instances)
    for name, selector in spec.get("runs", {}).items():
        baselines[name] = {"select": selector}
    table, plot = harness.compare_report(results, baselines, instances)
    harness.write_report(table, plot, args.out or ".")
    sys.stdout.write(harness.format_report(table))


def build_parser():
    # global flags are accepted before or after the subcommand
    def flags(p, suppress):
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p.add_argument("--out", default=d(None),
                       help="output directory (default: stdout / working dir)")
        p.add_argument("--workers", type=int, default=d(1), help="concurrent workers")
        p.add_argument("--seed", type=int, default=d(0), help="sampler seed")
        p.add_argument("-v", "--verbose", action="store_true", default=d(False))
        return p

    common = flags(argparse.ArgumentParser(add_help=False), suppress=True)
    parser = flags(argparse.ArgumentParser(prog="lidar-cover",
                                           description=__doc__.splitlines()[0]), suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    p = sub.add_parser("generate", help="toy or real-analog scene to JSON")
    p.add_argument("kind", choices=["toy", "real"])
    p.add_argument("--number", type=int, help="toy family member 1..11")
    p.add_argument("--layers", type=int)
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--walls", type=int, default=2)
    p.add_argument("--layer-spacing", type=float, default=1.0)
    p.add_argument("--hall", default="real-1", help="template name or layout JSON")
    p.add_argument("--lidar-spacing", type=float)
    p.add_argument("--density-ratio", type=int, default=5)
    p.add_argument("--range", type=float, help="sensor range")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("graph", help="scene JSON to coverage graph JSON")
    p.add_argument("scene")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("qubo", help="coverage graph to QUBO text")
    p.add_argument("graph")
    p.add_argument("--encoding", choices=ENCODINGS, default="binary")
    p.add_argument("--alpha", type=float, default=1.0)
    p.set_defaults(func=cmd_qubo)

    p = sub.add_parser("solve", help="classical solution of a coverage graph")
    p.add_argument("graph")
    p.add_argument("--method", choices=["exact", "greedy"], default="exact")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sample", help="simulated annealing on a graph or QUBO file")
    p.add_argument("input")
    p.add_argument("--reads", type=int, default=1000)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--encoding", choices=ENCODINGS, default="binary")
    p.add_argument("--timing", action="store_true", help="record wall time per read")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("decompose", help="partition a coverage graph")
    p.add_argument("graph")
    p.add_argument("--method", choices=["spectral", "vertical", "kl"], default="spectral")
    p.add_argument("--levels", type=int, default=1)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("run", help="run an experiment config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="one-axis-at-a-time parameter sweep from a plan file")
    p.add_argument("plan")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="comparison table and plot data from results")
    p.add_argument("spec", help="JSON with 'results', optional 'instances' and 'runs' selectors")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
