"""Compile a coverage graph into a QUBO with one-hot or binary slack bits.

Variable layout: decision bits for LiDARs ``0..L-1`` first, then slack bits
grouped by street id, bit index ascending. The Hamiltonian is

    H = sum_l x_l + alpha * sum_s P_s

with, for the binary encoding, ``P_s = (sum_{l in N_s} x_l - y_s - 1)^2`` and
``y_s = sum_i 2^i b_{s,i}`` (i = 0..k-1), and for the one-hot encoding
``P_s = (1 - sum_i b_{s,i})^2 + (sum_i i*b_{s,i} - sum_{l in N_s} x_l)^2``
(i = 1..|N_s|).
"""

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from lidar_cover.errors import InfeasibleError, ValidationError
from lidar_cover.graph import Solution, is_feasible

ENCODINGS = ("one_hot", "binary")


def slack_width(degree, encoding):
    """Number of slack bits for a street point covered by ``degree`` mounts."""
    if encoding not in ENCODINGS:
        raise ValidationError(f"unknown encoding {encoding!r}", field="encoding")
    if degree < 1:
        raise InfeasibleError("uncoverable street point")
    if encoding == "one_hot":
        return degree
    # ceil(log2(degree)) without float rounding
    return (degree - 1).bit_length()


@dataclass(frozen=True)
class Qubo:
    num_vars: int
    coefficients: dict
    offset: float
    encoding: str
    alpha: float
    var_meta: tuple
    source_label: str = ""
    coverage: tuple = None

    def __post_init__(self):
        for (i, j), v in self.coefficients.items():
            if not (0 <= i <= j < self.num_vars):
                raise ValidationError(f"bad coefficient index ({i}, {j})", field="coefficients")
            if v == 0:
                raise ValidationError(f"explicit zero at ({i}, {j})", field="coefficients")
        if len(self.var_meta) != self.num_vars:
            raise ValidationError("var_meta length must equal num_vars", field="var_meta")

    @property
    def num_decision(self):
        return sum(1 for m in self.var_meta if m[0] == "decision")

    def matrix(self):
        """Dense upper-triangular coefficient matrix."""
        q = np.zeros((self.num_vars, self.num_vars))
        for (i, j), v in self.coefficients.items():
            q[i, j] = v
        return q

    def csr_symmetric(self):
        """Linear terms and a CSR adjacency with off-diagonal couplings on both sides."""
        linear = np.zeros(self.num_vars)
        rows = defaultdict(list)
        for (i, j), v in self.coefficients.items():
            if i == j:
                linear[i] = v
            else:
                rows[i].append((j, v))
                rows[j].append((i, v))
        indptr = np.zeros(self.num_vars + 1, dtype=np.int64)
        indices = []
        data = []
        for i in range(self.num_vars):
            row = sorted(rows[i])
            indices.extend(j for j, _ in row)
            data.extend(v for _, v in row)
            indptr[i + 1] = len(indices)
        return linear, indptr, np.asarray(indices, dtype=np.int64), np.asarray(data, dtype=float)

    def dumps(self):
        """Canonical text form (17 significant digits, sorted coefficients)."""
        keys = sorted(self.coefficients)
        lines = [f"qubo {self.num_vars} {len(keys)} {self.offset:.17g} {self.encoding} {self.alpha:.17g}"]
        if self.source_label:
            lines.append(f"# label {self.source_label}")
        for idx, meta in enumerate(self.var_meta):
            if meta[0] == "decision":
                lines.append(f"# var {idx} decision {meta[1]}")
            else:
                lines.append(f"# var {idx} slack {meta[1]} {meta[2]}")
        if self.coverage is not None:
            for s, ns in enumerate(self.coverage):
                lines.append(f"# cover {s} " + " ".join(str(l) for l in ns))
        for i, j in keys:
            lines.append(f"{i} {j} {self.coefficients[(i, j)]:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        header = None
        meta = {}
        cover = {}
        coeffs = {}
        label = ""
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts and parts[0] == "var":
                    idx = int(parts[1])
                    if parts[2] == "decision":
                        meta[idx] = ("decision", int(parts[3]))
                    else:
                        meta[idx] = ("slack", int(parts[3]), int(parts[4]))
                elif parts and parts[0] == "cover":
                    cover[int(parts[1])] = tuple(int(x) for x in parts[2:])
                elif parts and parts[0] == "label":
                    label = " ".join(parts[1:])
                continue
            parts = line.split()
            if header is None:
                if parts[0] != "qubo" or len(parts) != 6:
                    raise ValidationError("missing 'qubo' header line")
                header = parts
                continue
            coeffs[(int(parts[0]), int(parts[1]))] = float(parts[2])
        if header is None:
            raise ValidationError("missing 'qubo' header line")
        n, nnz = int(header[1]), int(header[2])
        if nnz != len(coeffs):
            raise ValidationError(f"header declares {nnz} coefficients, found {len(coeffs)}")
        if sorted(meta) != list(range(n)):
            raise ValidationError("var metadata incomplete")
        coverage = tuple(cover[s] for s in range(len(cover))) if cover else None
        return cls(
            num_vars=n,
            coefficients=coeffs,
            offset=float(header[3]),
            encoding=header[4],
            alpha=float(header[5]),
            var_meta=tuple(meta[i] for i in range(n)),
            source_label=label,
            coverage=coverage,
        )


def _add_square(acc, terms, const, weight):
    """Accumulate weight * (sum c*v + const)^2 into acc; return the constant part."""
    for a, (u, cu) in enumerate(terms):
        # v^2 = v for binary v
        acc[(u, u)] += weight * (cu * cu + 2.0 * const * cu)
        for v, cv in terms[a + 1:]:
            key = (u, v) if u < v else (v, u)
            acc[key] += weight * 2.0 * cu * cv
    return weight * const * const


def build_qubo(graph, encoding="binary", alpha=1.0):
    """Expand the penalized set-cover Hamiltonian of ``graph`` into a Qubo."""
    if encoding not in ENCODINGS:
        raise ValidationError(f"unknown encoding {encoding!r}", field="encoding")
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and alpha > 0):
        raise ValidationError(f"must be > 0, got {alpha!r}", field="alpha")
    bad = graph.uncoverable()
    if bad:
        raise InfeasibleError(f"uncoverable street points: {bad}", street_ids=bad)

    alpha = float(alpha)
    acc = defaultdict(float)
    meta = [("decision", l) for l in range(graph.num_lidars)]
    for l in range(graph.num_lidars):
        acc[(l, l)] += 1.0
    offset = 0.0
    nxt = graph.num_lidars
    for s, ns in enumerate(graph.neighbors):
        k = slack_width(len(ns), encoding)
        bits = list(range(nxt, nxt + k))
        meta.extend(("slack", s, i) for i in range(k))
        nxt += k
        xs = [(l, 1.0) for l in ns]
        if encoding == "binary":
            terms = xs + [(b, -float(2 ** i)) for i, b in enumerate(bits)]
            offset += _add_square(acc, terms, -1.0, alpha)
        else:
            offset += _add_square(acc, [(b, -1.0) for b in bits], 1.0, alpha)
            terms = [(b, float(i + 1)) for i, b in enumerate(bits)] + [(l, -1.0) for l in ns]
            offset += _add_square(acc, terms, 0.0, alpha)
    coeffs = {key: v for key, v in acc.items() if v != 0.0}
    return Qubo(
        num_vars=nxt,
        coefficients=coeffs,
        offset=offset,
        encoding=encoding,
        alpha=alpha,
        var_meta=tuple(meta),
        source_label=graph.label,
        coverage=graph.neighbors,
    )


def energy(qubo, assignment):
    """Hamiltonian value of one bit vector."""
    a = [int(b) for b in assignment]
    if len(a) != qubo.num_vars:
        raise ValidationError(f"assignment has length {len(a)}, expected {qubo.num_vars}",
                              field="assignment")
    total = qubo.offset
    for (i, j), v in qubo.coefficients.items():
        if a[i] and a[j]:
            total += v
    return total


def energies(qubo, assignments):
    """Vectorized energy over the rows of a 2-D 0/1 array."""
    a = np.asarray(assignments, dtype=float)
    if a.ndim != 2 or a.shape[1] != qubo.num_vars:
        raise ValidationError(f"expected shape (m, {qubo.num_vars}), got {a.shape}",
                              field="assignments")
    if not qubo.coefficients:
        return np.full(len(a), qubo.offset)
    keys = np.array(list(qubo.coefficients), dtype=np.int64)
    vals = np.array(list(qubo.coefficients.values()))
    return qubo.offset + (a[:, keys[:, 0]] * a[:, keys[:, 1]]) @ vals


def _check_compatible(qubo, graph):
    decision = [m[1] for m in qubo.var_meta if m[0] == "decision"]
    if decision != list(range(graph.num_lidars)):
        raise ValidationError("QUBO decision variables do not match the graph's LiDARs")
    if qubo.coverage is not None and tuple(qubo.coverage) != graph.neighbors:
        raise ValidationError("QUBO was compiled from a different coverage graph")
    streets = {m[1] for m in qubo.var_meta if m[0] == "slack"}
    if streets and max(streets) >= graph.num_streets:
        raise ValidationError("QUBO slack variables reference unknown street points")


def decode(qubo, assignment, graph):
    """Project an assignment onto its decision bits and check coverage."""
    a = list(assignment)
    if len(a) != qubo.num_vars:
        raise ValidationError(f"assignment has length {len(a)}, expected {qubo.num_vars}",
                              field="assignment")
    _check_compatible(qubo, graph)
    active = [l for l in range(graph.num_lidars) if a[l]]
    return Solution.from_active(graph, active)


__all__ = [
    "ENCODINGS",
    "Qubo",
    "Solution",
    "build_qubo",
    "decode",
    "energies",
    "energy",
    "is_feasible",
    "slack_width",
]
