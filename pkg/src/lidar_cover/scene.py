"""Parametric hall geometries: toy corridors and real-world inspired halls."""

import json
import math
from dataclasses import dataclass, field
from importlib import resources

from shapely.geometry import LinearRing

from lidar_cover.errors import ValidationError
from lidar_cover.geometry import EPS, point_in_polygon


@dataclass(frozen=True)
class Wall:
    x1: float
    y1: float
    x2: float
    y2: float
    spacing: float

    @property
    def length(self):
        return math.hypot(self.x2 - self.x1, self.y2 - self.y1)

    def mounts(self):
        """Sensor mounts at exactly ``spacing`` apart, centred on the wall."""
        n = int(math.floor(self.length / self.spacing + 1e-9))
        if n == 0:
            ts = [0.5 * self.length]
        else:
            margin = 0.5 * (self.length - (n - 1) * self.spacing)
            ts = [margin + k * self.spacing for k in range(n)]
        ux = (self.x2 - self.x1) / self.length if self.length > 0 else 0.0
        uy = (self.y2 - self.y1) / self.length if self.length > 0 else 0.0
        return [(self.x1 + t * ux, self.y1 + t * uy) for t in ts]


@dataclass(frozen=True)
class Scene:
    """2-D hall: walls and pillars carry sensor mounts, obstacles block sight.

    ``street_points`` may be given explicitly (toy corridors); when it is
    None the street grid is laid over the hall interior at
    ``street_grid_spacing``.
    """

    width: float
    height: float
    walls: tuple = ()
    pillars: tuple = ()
    obstacles: tuple = ()
    street_grid_spacing: float = 1.0
    sensor_range: float = 1.0
    label: str = "scene"
    street_points: tuple = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "walls", tuple(self.walls))
        object.__setattr__(self, "pillars", tuple((float(x), float(y)) for x, y in self.pillars))
        object.__setattr__(
            self,
            "obstacles",
            tuple(tuple((float(x), float(y)) for x, y in poly) for poly in self.obstacles),
        )
        if self.street_points is not None:
            object.__setattr__(
                self, "street_points", tuple((float(x), float(y)) for x, y in self.street_points)
            )
        self._validate()

    def _validate(self):
        for name in ("width", "height", "street_grid_spacing", "sensor_range"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"must be > 0, got {value!r}", field=name)
        for i, wall in enumerate(self.walls):
            if not wall.spacing > 0:
                raise ValidationError(f"wall {i} spacing must be > 0", field="walls")
            for pt in ((wall.x1, wall.y1), (wall.x2, wall.y2)):
                if not self._in_bounds(pt):
                    raise ValidationError(f"wall {i} endpoint {pt} outside hall", field="walls")
        for pt in self.pillars:
            if not self._in_bounds(pt):
                raise ValidationError(f"pillar {pt} outside hall", field="pillars")
        for i, poly in enumerate(self.obstacles):
            if len(poly) < 3:
                raise ValidationError(f"obstacle {i} needs at least 3 vertices", field="obstacles")
            for pt in poly:
                if not self._in_bounds(pt):
                    raise ValidationError(f"obstacle {i} vertex {pt} outside hall", field="obstacles")
            ring = LinearRing(poly)
            if not ring.is_simple or abs(_signed_area(poly)) <= EPS:
                raise ValidationError(f"obstacle {i} is not a simple polygon", field="obstacles")
        if self.street_points is not None:
            for pt in self.street_points:
                if not self._in_bounds(pt):
                    raise ValidationError(f"street point {pt} outside hall", field="street_points")

    def _in_bounds(self, pt):
        x, y = pt
        return -EPS <= x <= self.width + EPS and -EPS <= y <= self.height + EPS

    def lidar_positions(self):
        """Wall mounts in wall order, then one mount per pillar."""
        positions = []
        for wall in self.walls:
            positions.extend(wall.mounts())
        positions.extend(self.pillars)
        return positions

    def grid_points(self):
        if self.street_points is not None:
            return list(self.street_points)
        g = self.street_grid_spacing
        nx = int(math.ceil(self.width / g - 1e-9))
        ny = int(math.ceil(self.height / g - 1e-9))
        points = []
        for j in range(1, ny):
            for i in range(1, nx):
                pt = (i * g, j * g)
                if any(point_in_polygon(pt, poly) >= 0 for poly in self.obstacles):
                    continue
                if any(math.hypot(pt[0] - px, pt[1] - py) <= EPS for px, py in self.pillars):
                    continue
                points.append(pt)
        return points

    def to_dict(self):
        data = {
            "width": self.width,
            "height": self.height,
            "walls": [
                {"x1": w.x1, "y1": w.y1, "x2": w.x2, "y2": w.y2, "spacing": w.spacing}
                for w in self.walls
            ],
            "pillars": [{"x": x, "y": y} for x, y in self.pillars],
            "obstacles": [[list(v) for v in poly] for poly in self.obstacles],
            "street_grid_spacing": self.street_grid_spacing,
            "sensor_range": self.sensor_range,
            "label": self.label,
        }
        if self.street_points is not None:
            data["street_points"] = [list(p) for p in self.street_points]
        return data

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                width=float(data["width"]),
                height=float(data["height"]),
                walls=[Wall(**{k: float(w[k]) for k in ("x1", "y1", "x2", "y2", "spacing")})
                       for w in data.get("walls", [])],
                pillars=[(p["x"], p["y"]) for p in data.get("pillars", [])],
                obstacles=data.get("obstacles", []),
                street_grid_spacing=float(data["street_grid_spacing"]),
                sensor_range=float(data["sensor_range"]),
                label=str(data.get("label", "scene")),
                street_points=data.get("street_points"),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed scene: {exc}") from exc

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def _signed_area(poly):
    return 0.5 * sum(
        poly[i][0] * poly[(i + 1) % len(poly)][1] - poly[(i + 1) % len(poly)][0] * poly[i][1]
        for i in range(len(poly))
    )


def generate_toy(layers, street_rows=3, walls=2, layer_spacing=1.0, sensor_range=2.5, label=None):
    """Corridor with one or two sensor walls and street rows between them.

    Each layer adds one mount per wall and one street point per row, all on
    the same x coordinate. Rows sit ``layer_spacing`` apart, walls one row gap
    beyond the outermost rows.
    """
    if not isinstance(layers, int) or layers < 1:
        raise ValidationError(f"must be a positive integer, got {layers!r}", field="layers")
    if street_rows not in (1, 2, 3):
        raise ValidationError(f"must be 1, 2 or 3, got {street_rows!r}", field="street_rows")
    if walls not in (1, 2):
        raise ValidationError(f"must be 1 or 2, got {walls!r}", field="walls")
    if not layer_spacing > 0:
        raise ValidationError(f"must be > 0, got {layer_spacing!r}", field="layer_spacing")
    if not sensor_range > 0:
        raise ValidationError(f"must be > 0, got {sensor_range!r}", field="sensor_range")

    d = float(layer_spacing)
    width = layers * d
    height = (street_rows + 1) * d
    wall_list = [Wall(0.0, 0.0, width, 0.0, d)]
    if walls == 2:
        wall_list.append(Wall(0.0, height, width, height, d))
    # row-major: every point of row 0, then row 1, ...
    street = [((k + 0.5) * d, r * d) for r in range(1, street_rows + 1) for k in range(layers)]
    return Scene(
        width=width,
        height=height,
        walls=wall_list,
        street_grid_spacing=d,
        sensor_range=float(sensor_range),
        label=label or f"toy-L{layers}-R{street_rows}-W{walls}",
        street_points=street,
    )


# (layers, street_rows, walls) for the eleven toy instances, smallest first.
TOY_FAMILY = (
    (2, 1, 1),
    (3, 1, 1),
    (4, 1, 2),
    (4, 2, 2),
    (5, 2, 2),
    (6, 2, 2),
    (7, 2, 2),
    (8, 3, 2),
    (9, 3, 2),
    (10, 3, 2),
    (11, 3, 2),
)


def toy_instance(number, layer_spacing=1.0, sensor_range=2.5):
    """Scene for ``Toy <number>``, 1 <= number <= 11."""
    if not 1 <= number <= len(TOY_FAMILY):
        raise ValidationError(f"toy number must be in 1..{len(TOY_FAMILY)}", field="number")
    layers, rows, walls = TOY_FAMILY[number - 1]
    return generate_toy(layers, rows, walls, layer_spacing, sensor_range, label=f"toy-{number}")


TEMPLATE_ALIASES = {"real-small": "real-1", "real-large": "real-12"}


def template_names():
    root = resources.files("lidar_cover") / "templates"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_template(name):
    """Bundled hall layout by name (see ``template_names()``)."""
    name = TEMPLATE_ALIASES.get(name, name)
    path = resources.files("lidar_cover") / "templates" / f"{name}.json"
    if not path.is_file():
        raise ValidationError(f"unknown template {name!r}; known: {template_names()}", field="hall")
    return json.loads(path.read_text())


def generate_real(hall, lidar_spacing=None, density_ratio=5, sensor_range=None, label=None):
    """Hall with perimeter/interior walls, pillars and occluding obstacles.

    ``hall`` is a bundled template name or a dict with ``width``, ``height``,
    ``walls`` (dicts with x1, y1, x2, y2), ``pillars`` and ``obstacles``.
    Templates may carry default ``lidar_spacing`` and ``sensor_range``.
    """
    if isinstance(hall, str):
        name = TEMPLATE_ALIASES.get(hall, hall)
        layout = load_template(hall)
    else:
        name = "custom"
        layout = dict(hall)
    if lidar_spacing is None:
        lidar_spacing = layout.get("lidar_spacing")
    if sensor_range is None:
        sensor_range = layout.get("sensor_range")
    if lidar_spacing is None or not lidar_spacing > 0:
        raise ValidationError(f"must be > 0, got {lidar_spacing!r}", field="lidar_spacing")
    if sensor_range is None or not sensor_range > 0:
        raise ValidationError(f"must be > 0, got {sensor_range!r}", field="sensor_range")
    if not isinstance(density_ratio, int) or density_ratio < 1:
        raise ValidationError(f"must be a positive integer, got {density_ratio!r}",
                              field="density_ratio")
    try:
        walls = [Wall(float(w["x1"]), float(w["y1"]), float(w["x2"]), float(w["y2"]),
                      float(lidar_spacing)) for w in layout.get("walls", [])]
        return Scene(
            width=float(layout["width"]),
            height=float(layout["height"]),
            walls=walls,
            pillars=[(p["x"], p["y"]) if isinstance(p, dict) else tuple(p)
                     for p in layout.get("pillars", [])],
            obstacles=layout.get("obstacles", []),
            street_grid_spacing=float(lidar_spacing) / density_ratio,
            sensor_range=float(sensor_range),
            label=label or layout.get("label", name),
        )
    except KeyError as exc:
        raise ValidationError(f"hall layout missing key {exc}", field="hall") from exc
