"""Bipartite coverage graph between candidate sensor mounts and street points."""

import json
from dataclasses import dataclass, field

import numpy as np

from lidar_cover.errors import ValidationError
from lidar_cover.geometry import visible_many


@dataclass(frozen=True)
class CoverageGraph:
    """Candidate LiDAR mounts, street points and, per street point, the
    sorted ids of the mounts that cover it.

    ``lidar_ids``/``street_ids`` map local indices to the ids of the graph
    this one was cut from; for an undecomposed graph they are the identity.
    """

    lidar_positions: tuple
    street_points: tuple
    neighbors: tuple
    label: str = "graph"
    lidar_ids: tuple = field(default=None)
    street_ids: tuple = field(default=None)

    def __post_init__(self):
        lp = tuple((float(x), float(y)) for x, y in self.lidar_positions)
        sp = tuple((float(x), float(y)) for x, y in self.street_points)
        nb = tuple(tuple(int(l) for l in ns) for ns in self.neighbors)
        object.__setattr__(self, "lidar_positions", lp)
        object.__setattr__(self, "street_points", sp)
        object.__setattr__(self, "neighbors", nb)
        if len(nb) != len(sp):
            raise ValidationError("need one neighbor list per street point", field="neighbors")
        for s, ns in enumerate(nb):
            if any(b <= a for a, b in zip(ns, ns[1:])):
                raise ValidationError(f"street {s}: neighbors must be sorted and unique",
                                      field="neighbors")
            if ns and not (0 <= ns[0] and ns[-1] < len(lp)):
                raise ValidationError(f"street {s}: LiDAR id out of range", field="neighbors")
        ids = tuple(range(len(lp))) if self.lidar_ids is None else tuple(int(i) for i in self.lidar_ids)
        sids = tuple(range(len(sp))) if self.street_ids is None else tuple(int(i) for i in self.street_ids)
        if len(ids) != len(lp) or len(sids) != len(sp):
            raise ValidationError("id maps must match node counts")
        object.__setattr__(self, "lidar_ids", ids)
        object.__setattr__(self, "street_ids", sids)

    @property
    def num_lidars(self):
        return len(self.lidar_positions)

    @property
    def num_streets(self):
        return len(self.street_points)

    @property
    def feasible(self):
        return all(len(ns) > 0 for ns in self.neighbors)

    def uncoverable(self):
        return [s for s, ns in enumerate(self.neighbors) if not ns]

    def num_edges(self):
        return sum(len(ns) for ns in self.neighbors)

    def coverage_sets(self):
        """Per LiDAR, the sorted street ids it covers."""
        cover = [[] for _ in range(self.num_lidars)]
        for s, ns in enumerate(self.neighbors):
            for l in ns:
                cover[l].append(s)
        return [tuple(c) for c in cover]

    def to_dict(self):
        data = {
            "label": self.label,
            "lidar_positions": [list(p) for p in self.lidar_positions],
            "street_points": [list(p) for p in self.street_points],
            "neighbors": [list(ns) for ns in self.neighbors],
        }
        if self.lidar_ids != tuple(range(self.num_lidars)):
            data["lidar_ids"] = list(self.lidar_ids)
        if self.street_ids != tuple(range(self.num_streets)):
            data["street_ids"] = list(self.street_ids)
        return data

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                lidar_positions=data["lidar_positions"],
                street_points=data["street_points"],
                neighbors=data["neighbors"],
                label=data.get("label", "graph"),
                lidar_ids=data.get("lidar_ids"),
                street_ids=data.get("street_ids"),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed coverage graph: {exc}") from exc

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def from_coverage(cover, num_streets=None, label="graph"):
    """Build a graph from per-LiDAR coverage sets (positions are placeholders)."""
    if num_streets is None:
        num_streets = 1 + max((s for c in cover for s in c), default=-1)
    neighbors = [[] for _ in range(num_streets)]
    for l, streets in enumerate(cover):
        for s in sorted(set(streets)):
            neighbors[s].append(l)
    return CoverageGraph(
        lidar_positions=[(float(l), 0.0) for l in range(len(cover))],
        street_points=[(float(s), 1.0) for s in range(num_streets)],
        neighbors=neighbors,
        label=label,
    )


def build_coverage_graph(scene):
    """Connect every mount to the street points within range and in sight."""
    lidars = np.array(scene.lidar_positions(), dtype=float).reshape(-1, 2)
    streets = np.array(scene.grid_points(), dtype=float).reshape(-1, 2)
    neighbors = [[] for _ in range(len(streets))]
    r = scene.sensor_range
    for l, p in enumerate(lidars):
        dist = np.hypot(streets[:, 0] - p[0], streets[:, 1] - p[1])
        cand = np.nonzero(dist <= r + 1e-9 * max(1.0, r))[0]
        if len(cand) == 0:
            continue
        ok = visible_many(p, streets[cand], scene.obstacles)
        for s in cand[ok]:
            neighbors[s].append(l)
    return CoverageGraph(
        lidar_positions=[tuple(p) for p in lidars],
        street_points=[tuple(s) for s in streets],
        neighbors=neighbors,
        label=scene.label,
    )


@dataclass(frozen=True)
class Solution:
    """A sensor placement: the active LiDAR ids and its coverage status."""

    active_lidars: tuple
    objective: int
    feasible: bool
    uncovered: tuple = ()
    proven: bool = True

    @classmethod
    def from_active(cls, graph, active, proven=True):
        active = tuple(sorted(set(int(l) for l in active)))
        ok, uncovered = is_feasible(graph, active)
        return cls(active, len(active), ok, tuple(uncovered), proven)


def is_feasible(graph, active_lidars):
    """Return ``(ok, uncovered)``: whether every street point sees an active mount."""
    active = set()
    for l in active_lidars:
        l = int(l)
        if not 0 <= l < graph.num_lidars:
            raise ValidationError(f"unknown LiDAR id {l}", field="active_lidars")
        active.add(l)
    uncovered = [s for s, ns in enumerate(graph.neighbors) if not any(l in active for l in ns)]
    return not uncovered, uncovered
