"""Split coverage graphs into 2^n subproblems and merge their solutions.

Clustering runs on the combined node set: LiDAR ``l`` is node ``l`` and
street point ``s`` is node ``L + s``. Each cluster keeps only the coverage
edges internal to it, so a street point whose covering mounts all land in
other clusters makes its cluster infeasible.
"""

import json
from dataclasses import dataclass, replace

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from lidar_cover.errors import InfeasibleError, NumericError, ValidationError
from lidar_cover.graph import CoverageGraph, Solution

METHODS = ("spectral", "vertical", "kernighan_lin")
ZERO_TOL = 1e-12
EIG_TOL = 1e-8
EIG_SEED = 20240611
DENSE_LIMIT = 3000
# networkx shuffles node order internally; pin it
KL_SEED = 0
DEGENERACY_TOL = 1e-9


def _num_nodes(graph):
    return graph.num_lidars + graph.num_streets


def _edges(graph):
    L = graph.num_lidars
    return [(l, L + s) for s, ns in enumerate(graph.neighbors) for l in ns]


def _adjacency(graph):
    n = _num_nodes(graph)
    edges = _edges(graph)
    if not edges:
        return sp.csr_matrix((n, n))
    rows, cols = np.array(edges, dtype=np.int64).T
    a = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return (a + a.T).tocsr()


def induced(graph, nodes, label):
    """Subgraph on the given combined node indices; ids map back to ``graph``'s ids."""
    L = graph.num_lidars
    nodes = sorted(int(v) for v in nodes)
    lidars = [v for v in nodes if v < L]
    streets = [v - L for v in nodes if v >= L]
    local = {l: i for i, l in enumerate(lidars)}
    neighbors = [[local[l] for l in graph.neighbors[s] if l in local] for s in streets]
    return CoverageGraph(
        lidar_positions=[graph.lidar_positions[l] for l in lidars],
        street_points=[graph.street_points[s] for s in streets],
        neighbors=neighbors,
        label=label,
        lidar_ids=[graph.lidar_ids[l] for l in lidars],
        street_ids=[graph.street_ids[s] for s in streets],
    )


def fiedler_vector(adjacency):
    """Eigenvector of the second-smallest eigenvalue of the normalized Laplacian.

    Dense symmetric eigensolver up to DENSE_LIMIT nodes, seeded Lanczos
    (ARPACK) beyond. Within a repeated eigenvalue the seeded projection is
    returned. Sign is fixed so the largest-magnitude entry is positive.
    """
    n = adjacency.shape[0]
    deg = np.asarray(adjacency.sum(axis=1)).ravel()
    inv_sqrt = np.zeros(n)
    inv_sqrt[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
    d = sp.diags(inv_sqrt)
    lap = sp.identity(n, format="csr") - d @ adjacency @ d
    if n <= DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(lap.toarray())
    else:
        # largest eigenpairs of 2I - L are the smallest of L
        shifted = 2.0 * sp.identity(n, format="csr") - lap
        v0 = np.random.default_rng(EIG_SEED).random(n)
        try:
            vals, vecs = eigsh(shifted, k=3, which="LA", v0=v0, tol=1e-12, maxiter=10_000)
        except ArpackNoConvergence as exc:
            raise NumericError("eigensolver did not converge") from exc
        order = np.argsort(-vals)
        vals, vecs = 2.0 - vals[order], vecs[:, order]
    lam, v = vals[1], vecs[:, 1]
    # A repeated second eigenvalue leaves the basis vector up to the solver,
    # often with exact zeros. Use the projection of a seeded vector instead,
    # which is what a seeded Krylov iteration converges to.
    space = [i for i in range(1, len(vals)) if abs(vals[i] - lam) <= DEGENERACY_TOL]
    if len(space) > 1:
        basis = vecs[:, space]
        r = np.random.default_rng(EIG_SEED).standard_normal(n)
        v = basis @ (basis.T @ r)
        v /= np.linalg.norm(v)
    residual = np.linalg.norm(lap @ v - lam * v)
    if residual > EIG_TOL:
        raise NumericError(f"Fiedler vector residual {residual:.3g} exceeds {EIG_TOL}")
    k = int(np.argmax(np.abs(v) - 1e-12 * np.arange(n)))
    if v[k] < 0:
        v = -v
    return v


def _sign_split(v):
    pos = v >= -ZERO_TOL
    if pos.all() or not pos.any():
        pos = v >= np.median(v)
        if pos.all():
            pos = np.zeros(len(v), dtype=bool)
            pos[: (len(v) + 1) // 2] = True
    return pos


def _spectral_sides(graph):
    n = _num_nodes(graph)
    adj = _adjacency(graph)
    ncomp, labels = connected_components(adj, directed=False)
    if ncomp == 1:
        return _sign_split(fiedler_vector(adj))
    # Disconnected: a zero-cut split exists. Bisect the giant component
    # spectrally only when it alone outweighs everything else, then pack
    # the remaining components onto the lighter side.
    comps = [np.nonzero(labels == c)[0] for c in range(ncomp)]
    comps.sort(key=lambda c: (-len(c), c[0]))
    pos = np.zeros(n, dtype=bool)
    sizes = [0, 0]
    rest = comps
    if len(comps[0]) > n / 2:
        giant = comps[0]
        sub = adj[giant][:, giant]
        side = _sign_split(fiedler_vector(sub))
        pos[giant[side]] = True
        sizes = [int(side.sum()), int((~side).sum())]
        rest = comps[1:]
    for comp in rest:
        if sizes[0] <= sizes[1]:
            pos[comp] = True
            sizes[0] += len(comp)
        else:
            sizes[1] += len(comp)
    return pos


def _check_size(graph):
    if _num_nodes(graph) < 2:
        raise ValidationError("bisection needs at least 2 nodes", field="graph")


def _children(graph, pos, label):
    idx = np.arange(len(pos))
    return (induced(graph, idx[pos], f"{label}.0"), induced(graph, idx[~pos], f"{label}.1"))


def spectral_bisect(graph):
    """Split by the sign pattern of the normalized-Laplacian Fiedler vector."""
    _check_size(graph)
    return _children(graph, _spectral_sides(graph), graph.label)


def _kl_sides(graph):
    n = _num_nodes(graph)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(_edges(graph))
    seed = ({v for v in range(n) if v % 2 == 0}, {v for v in range(n) if v % 2 == 1})
    a, _ = nx.community.kernighan_lin_bisection(g, partition=seed, max_iter=10 ** 6,
                                                seed=KL_SEED)
    pos = np.zeros(n, dtype=bool)
    pos[sorted(a)] = True
    return pos


def kl_bisect(graph):
    """Kernighan-Lin refinement of the even/odd node split."""
    _check_size(graph)
    return _children(graph, _kl_sides(graph), graph.label)


def cut_size(graph, pos):
    """Number of coverage edges whose ends lie on different sides."""
    return sum(1 for l, v in _edges(graph) if pos[l] != pos[v])


def _node_x(graph):
    return [p[0] for p in graph.lidar_positions] + [p[0] for p in graph.street_points]


@dataclass(frozen=True)
class Partition:
    """Clusters of a parent graph; cluster ids refer to the parent's local ids."""

    method: str
    levels: int
    clusters: tuple
    history: tuple
    parent: CoverageGraph

    def to_dict(self):
        clusters = []
        for c in self.clusters:
            d = c.to_dict()
            d.pop("lidar_ids", None)
            d.pop("street_ids", None)
            d["parent_lidar_ids"] = list(c.lidar_ids)
            d["parent_street_ids"] = list(c.street_ids)
            clusters.append(d)
        return {"method": self.method, "levels": self.levels, "clusters": clusters}

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _identity_view(graph):
    return replace(graph, lidar_ids=None, street_ids=None)


def vertical_cut(graph, parts=2):
    """Cut into ``parts`` vertical strips with (near) equal node counts."""
    n = _num_nodes(graph)
    if not isinstance(parts, int) or parts < 2:
        raise ValidationError(f"must be an integer >= 2, got {parts!r}", field="parts")
    if parts > n:
        raise ValidationError(f"cannot cut {n} nodes into {parts} strips", field="parts")
    root = _identity_view(graph)
    xs = _node_x(root)
    order = sorted(range(n), key=lambda v: (xs[v], v))
    strips = np.array_split(np.array(order), parts)
    assignment = np.zeros(n, dtype=np.int64)
    for k, strip in enumerate(strips):
        assignment[strip] = k
    clusters = tuple(induced(root, strip, f"{graph.label}.{k}") for k, strip in enumerate(strips))
    return Partition("vertical", 1, clusters, (tuple(int(a) for a in assignment),), root)


def _bisect_sides(graph, method):
    if method == "spectral":
        return _spectral_sides(graph)
    if method == "kernighan_lin":
        return _kl_sides(graph)
    n = _num_nodes(graph)
    xs = _node_x(graph)
    order = sorted(range(n), key=lambda v: (xs[v], v))
    pos = np.zeros(n, dtype=bool)
    pos[order[: (n + 1) // 2]] = True
    return pos


def recursive_decompose(graph, levels, method="spectral"):
    """Bisect every cluster ``levels`` times, breadth first, into 2^levels clusters."""
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}",
                              field="method")
    if not isinstance(levels, int) or levels < 0:
        raise ValidationError(f"must be a non-negative integer, got {levels!r}", field="levels")
    if 2 ** levels > _num_nodes(graph):
        raise ValidationError(f"2^{levels} clusters exceed {_num_nodes(graph)} nodes",
                              field="levels")
    root = _identity_view(graph)
    clusters = [root]
    history = []
    for level in range(levels):
        nxt = []
        record = []
        for c in clusters:
            if _num_nodes(c) < 2:
                raise ValidationError(f"over-decomposed: cluster {c.label} at level {level}")
            pos = _bisect_sides(c, method)
            if pos.all() or not pos.any():
                raise ValidationError(f"over-decomposed: empty side below {c.label}")
            record.append(tuple(int(not p) for p in pos))
            nxt.extend(_children(c, pos, c.label))
        clusters = nxt
        history.append(tuple(record))
    return Partition(method, levels, tuple(clusters), tuple(history), root)


def merge_solutions(partition, subsolutions):
    """Union the clusters' active mounts and re-check coverage on the parent."""
    if len(subsolutions) != len(partition.clusters):
        raise ValidationError(
            f"expected {len(partition.clusters)} subsolutions, got {len(subsolutions)}",
            field="subsolutions")
    bad = [k for k, sol in enumerate(subsolutions) if sol is None or not sol.feasible]
    if bad:
        raise InfeasibleError(f"infeasible subsolutions for clusters {bad}")
    active = set()
    for cluster, sol in zip(partition.clusters, subsolutions):
        active.update(cluster.lidar_ids[l] for l in sol.active_lidars)
    return Solution.from_active(partition.parent, active)
