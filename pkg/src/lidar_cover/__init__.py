"""LiDAR placement as set cover: scene generation, QUBO compilation,
classical and annealing-style solvers, decomposition and benchmark metrics."""

from lidar_cover.errors import InfeasibleError, NumericError, ValidationError
from lidar_cover.scene import Scene, Wall, generate_real, generate_toy, toy_instance
from lidar_cover.geometry import visible
from lidar_cover.graph import CoverageGraph, Solution, build_coverage_graph, is_feasible
from lidar_cover.qubo import Qubo, build_qubo, decode, energy, slack_width
from lidar_cover.solvers import best_feasible, solve_exact, solve_greedy
from lidar_cover.sampler import SampleSet, SamplerParams, sample_sa
from lidar_cover.decompose import (
    Partition,
    kl_bisect,
    merge_solutions,
    recursive_decompose,
    spectral_bisect,
    vertical_cut,
)
from lidar_cover.metrics import (
    MetricsReport,
    bootstrap_ci,
    p_opt,
    relaxed_optimum_threshold,
    samples_to_solution,
    tts,
)

__version__ = "0.1.0"

__all__ = [
    "CoverageGraph",
    "InfeasibleError",
    "MetricsReport",
    "NumericError",
    "Partition",
    "Qubo",
    "SampleSet",
    "SamplerParams",
    "Scene",
    "Solution",
    "ValidationError",
    "Wall",
    "best_feasible",
    "bootstrap_ci",
    "build_coverage_graph",
    "build_qubo",
    "decode",
    "energy",
    "generate_real",
    "generate_toy",
    "is_feasible",
    "kl_bisect",
    "merge_solutions",
    "p_opt",
    "recursive_decompose",
    "relaxed_optimum_threshold",
    "sample_sa",
    "samples_to_solution",
    "slack_width",
    "solve_exact",
    "solve_greedy",
    "spectral_bisect",
    "toy_instance",
    "tts",
    "vertical_cut",
]
