"""Seeded simulated-annealing sampler for QUBOs.

Each read starts from a uniformly random assignment drawn from its own
splitmix64 stream, seeded by ``mix(seed, read)``, and performs ``sweeps``
Metropolis sweeps in fixed variable order. Reads are independent, so the
result does not depend on how many threads execute them.
"""

import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from lidar_cover.errors import ValidationError
from lidar_cover.graph import Solution
from lidar_cover.qubo import energies

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
INTERPOLATIONS = ("geometric", "linear")


def mix(seed, read):
    """64-bit splitmix hash of (seed, read index)."""
    z = (int(seed) + (int(read) + 1) * _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SamplerParams:
    reads: int = 1000
    sweeps: int = 1000
    beta_schedule: tuple = None  # (beta_start, beta_end, "geometric" | "linear"); None = from QUBO
    seed: int = 0
    passthrough: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (isinstance(self.reads, int) and self.reads >= 1):
            raise ValidationError(f"must be an integer >= 1, got {self.reads!r}", field="reads")
        if not (isinstance(self.sweeps, int) and self.sweeps >= 1):
            raise ValidationError(f"must be an integer >= 1, got {self.sweeps!r}", field="sweeps")
        if not 0 <= int(self.seed) <= MASK64:
            raise ValidationError("must fit in 64 bits", field="seed")
        if self.beta_schedule is not None:
            b0, b1, interp = self.beta_schedule
            if not (0 < b0 <= b1):
                raise ValidationError(f"need 0 < beta_start <= beta_end, got ({b0}, {b1})",
                                      field="beta_schedule")
            if interp not in INTERPOLATIONS:
                raise ValidationError(f"unknown interpolation {interp!r}", field="beta_schedule")

    def to_dict(self):
        return {
            "reads": self.reads,
            "sweeps": self.sweeps,
            "beta_schedule": None if self.beta_schedule is None else list(self.beta_schedule),
            "seed": int(self.seed),
            "passthrough": dict(self.passthrough),
        }


def default_beta_schedule(qubo):
    """Geometric from 0.1/mean|coeff| to 10/min|coeff| over nonzero coefficients."""
    mags = np.abs(np.fromiter(qubo.coefficients.values(), dtype=float))
    mags = mags[mags > 0]
    if len(mags) == 0:
        return (1.0, 1.0, "geometric")
    b0 = 0.1 / mags.mean()
    b1 = 10.0 / mags.min()
    return (b0, max(b0, b1), "geometric")


def betas(schedule, sweeps):
    b0, b1, interp = schedule
    if sweeps == 1:
        return np.array([b0], dtype=float)
    t = np.arange(sweeps) / (sweeps - 1)
    if interp == "geometric":
        return b0 * (b1 / b0) ** t
    return b0 + (b1 - b0) * t


_U_GAMMA = np.uint64(_GAMMA)
_U_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S63 = np.uint64(63)


@numba.njit(cache=True, nogil=True)
def _next(state):
    state = state + _U_GAMMA
    z = state
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return state, z ^ (z >> _S31)


@numba.njit(cache=True, nogil=True)
def _anneal_one(linear, indptr, indices, data, beta_list, seed, out):
    n = linear.shape[0]
    state = seed
    for i in range(n):
        state, z = _next(state)
        out[i] = np.uint8(z >> _S63)
    field = linear.copy()
    for i in range(n):
        if out[i]:
            for k in range(indptr[i], indptr[i + 1]):
                field[indices[k]] += data[k]
    for beta in beta_list:
        for i in range(n):
            delta = field[i] if out[i] == 0 else -field[i]
            accept = delta <= 0.0
            if not accept:
                state, z = _next(state)
                u = np.float64(z >> _S11) * (1.0 / 9007199254740992.0)
                accept = u < math.exp(-beta * delta)
            if accept:
                sign = 1.0 if out[i] == 0 else -1.0
                out[i] = 1 - out[i]
                for k in range(indptr[i], indptr[i + 1]):
                    field[indices[k]] += sign * data[k]


@numba.njit(cache=True, nogil=True)
def _anneal(linear, indptr, indices, data, beta_list, seeds, out):
    for r in range(seeds.shape[0]):
        _anneal_one(linear, indptr, indices, data, beta_list, seeds[r], out[r])


@dataclass(frozen=True)
class SampleRecord:
    read: int
    assignment: tuple
    energy: float
    objective: int
    feasible: bool


@dataclass(frozen=True)
class SampleSet:
    """Decoded reads sorted by (energy, read index)."""

    records: tuple
    params: SamplerParams
    source_label: str
    num_vars: int
    num_lidars: int
    coverage: tuple
    wall_time_per_read: float = 0.0
    beta_schedule: tuple = None

    def __len__(self):
        return len(self.records)

    def solution(self, record):
        active = [l for l in range(self.num_lidars) if record.assignment[l]]
        uncovered = [s for s, ns in enumerate(self.coverage)
                     if not any(record.assignment[l] for l in ns)]
        return Solution(tuple(active), len(active), not uncovered, tuple(uncovered))

    def objectives(self):
        return np.array([r.objective for r in self.records])

    def feasible_mask(self):
        return np.array([r.feasible for r in self.records], dtype=bool)

    def to_csv(self, include_timing=False):
        buf = io.StringIO()
        buf.write(f"# source_label={self.source_label}\n")
        buf.write(f"# num_vars={self.num_vars}\n")
        buf.write(f"# params={json.dumps(self.params.to_dict(), sort_keys=True)}\n")
        if self.beta_schedule is not None:
            b0, b1, interp = self.beta_schedule
            buf.write(f"# beta_schedule={b0:.17g},{b1:.17g},{interp}\n")
        if include_timing:
            buf.write(f"# wall_time_per_read={self.wall_time_per_read:.6g}\n")
        buf.write("read,energy,objective,feasible,assignment_hex\n")
        width = max(1, (self.num_vars + 3) // 4)
        for r in self.records:
            value = sum(1 << i for i, b in enumerate(r.assignment) if b)
            buf.write(f"{r.read},{r.energy:.17g},{r.objective},{int(r.feasible)},"
                      f"{value:0{width}x}\n")
        return buf.getvalue()

    @classmethod
    def merge(cls, sets):
        """Concatenate batches; read indices are renumbered consecutively."""
        records = []
        offset = 0
        for ss in sets:
            for r in sorted(ss.records, key=lambda r: r.read):
                records.append(SampleRecord(r.read + offset, r.assignment, r.energy,
                                            r.objective, r.feasible))
            offset += len(ss.records)
        records.sort(key=lambda r: (r.energy, r.read))
        first = sets[0]
        total_time = sum(ss.wall_time_per_read * len(ss) for ss in sets)
        return cls(tuple(records), first.params, first.source_label, first.num_vars,
                   first.num_lidars, first.coverage, total_time / max(1, len(records)),
                   first.beta_schedule)


def _anneal_assignments(qubo, params, workers=1):
    schedule = params.beta_schedule or default_beta_schedule(qubo)
    beta_list = betas(schedule, params.sweeps)
    linear, indptr, indices, data = qubo.csr_symmetric()
    seeds = np.array([mix(params.seed, r) for r in range(params.reads)], dtype=np.uint64)
    out = np.zeros((params.reads, qubo.num_vars), dtype=np.uint8)
    start = time.perf_counter()
    if workers <= 1:
        _anneal(linear, indptr, indices, data, beta_list, seeds, out)
    else:
        # the kernel releases the GIL; chunks write disjoint rows of ``out``
        chunks = np.array_split(np.arange(params.reads), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_anneal, linear, indptr, indices, data, beta_list,
                                   seeds[c], out[c[0]:c[-1] + 1]) for c in chunks if len(c)]
            for f in futures:
                f.result()
    elapsed = time.perf_counter() - start
    return out, schedule, elapsed


def sample_sa(qubo, params, workers=1):
    """Anneal ``params.reads`` independent reads of ``qubo`` and decode them.

    Feasibility is judged against the coverage structure the QUBO was
    compiled from; slack bits are ignored when decoding. ``workers`` > 1
    anneals chunks of reads on a thread pool with identical results.
    """
    if qubo.coverage is None:
        raise ValidationError("QUBO carries no coverage structure to decode against",
                              field="qubo")
    num_lidars = qubo.num_decision
    out, schedule, elapsed = _anneal_assignments(qubo, params, workers)
    e = energies(qubo, out)
    x = out[:, :num_lidars].astype(bool)
    objective = x.sum(axis=1)
    feasible = np.ones(params.reads, dtype=bool)
    for ns in qubo.coverage:
        feasible &= x[:, list(ns)].any(axis=1)
    records = [
        SampleRecord(r, tuple(int(b) for b in out[r]), float(e[r]), int(objective[r]),
                     bool(feasible[r]))
        for r in range(params.reads)
    ]
    records.sort(key=lambda rec: (rec.energy, rec.read))
    return SampleSet(
        records=tuple(records),
        params=params,
        source_label=qubo.source_label,
        num_vars=qubo.num_vars,
        num_lidars=num_lidars,
        coverage=tuple(qubo.coverage),
        wall_time_per_read=elapsed / params.reads,
        beta_schedule=tuple(schedule),
    )
