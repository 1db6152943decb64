"""Planar predicates for line-of-sight tests against polygonal occluders.

All predicates use an absolute tolerance of ``EPS`` meters. A sight line that
only grazes an obstacle (touches a vertex or slides along an edge) is visible;
one that crosses an edge transversally or runs through the interior is not.
"""

import math

import numpy as np

EPS = 1e-9


def _cross(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _side(a, b, c):
    """Sign of c relative to the directed line a->b, zero within EPS meters."""
    length = math.hypot(b[0] - a[0], b[1] - a[1])
    if length <= EPS:
        return 0
    d = _cross(a[0], a[1], b[0], b[1], c[0], c[1]) / length
    if d > EPS:
        return 1
    if d < -EPS:
        return -1
    return 0


def point_on_segment(p, a, b):
    """True if p lies on the closed segment ab (within EPS)."""
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    length2 = dx * dx + dy * dy
    if length2 <= EPS * EPS:
        return math.hypot(p[0] - ax, p[1] - ay) <= EPS
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / length2
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy)) <= EPS


def point_in_polygon(p, polygon):
    """Classify p against a simple polygon: 1 strictly inside, 0 on the boundary, -1 outside."""
    n = len(polygon)
    for i in range(n):
        if point_on_segment(p, polygon[i], polygon[(i + 1) % n]):
            return 0
    x, y = p
    inside = False
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xc > x:
                inside = not inside
    return 1 if inside else -1


def _segment_params(p, q, polygon):
    """Parameters t in [0, 1] where segment pq meets the polygon boundary."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    length2 = dx * dx + dy * dy
    ts = {0.0, 1.0}
    n = len(polygon)
    for i in range(n):
        a = polygon[i]
        b = polygon[(i + 1) % n]
        # vertices lying on pq
        if point_on_segment(a, p, q):
            ts.add(((a[0] - p[0]) * dx + (a[1] - p[1]) * dy) / length2)
        # transversal intersection of pq with edge ab
        ex, ey = b[0] - a[0], b[1] - a[1]
        denom = dx * ey - dy * ex
        if abs(denom) > EPS * EPS:
            t = ((a[0] - p[0]) * ey - (a[1] - p[1]) * ex) / denom
            u = ((a[0] - p[0]) * dy - (a[1] - p[1]) * dx) / denom
            if -EPS <= t <= 1 + EPS and -EPS <= u <= 1 + EPS:
                ts.add(min(1.0, max(0.0, t)))
    return sorted(ts)


def _blocked_by(p, q, polygon):
    if point_in_polygon(p, polygon) == 1 or point_in_polygon(q, polygon) == 1:
        return True
    n = len(polygon)
    for i in range(n):
        a = polygon[i]
        b = polygon[(i + 1) % n]
        s1 = _side(a, b, p)
        s2 = _side(a, b, q)
        s3 = _side(p, q, a)
        s4 = _side(p, q, b)
        if s1 * s2 < 0 and s3 * s4 < 0:
            return True
    # only touching contacts remain: probe each piece between contacts
    ts = _segment_params(p, q, polygon)
    for t0, t1 in zip(ts, ts[1:]):
        if t1 - t0 <= 1e-15:
            continue
        tm = 0.5 * (t0 + t1)
        m = (p[0] + tm * (q[0] - p[0]), p[1] + tm * (q[1] - p[1]))
        if point_in_polygon(m, polygon) == 1:
            return True
    return False


def visible(p, q, obstacles):
    """Return True if the sight line between p and q is not blocked.

    Parameters
    ----------
    p, q : pair of float
        End points in meters. Coincident points are always visible.
    obstacles : sequence of polygons
        Each polygon is a sequence of (x, y) vertices, implicitly closed.
    """
    p = (float(p[0]), float(p[1]))
    q = (float(q[0]), float(q[1]))
    if math.hypot(q[0] - p[0], q[1] - p[1]) <= EPS:
        return True
    for polygon in obstacles:
        xs = [v[0] for v in polygon]
        ys = [v[1] for v in polygon]
        if (max(p[0], q[0]) < min(xs) - EPS or min(p[0], q[0]) > max(xs) + EPS
                or max(p[1], q[1]) < min(ys) - EPS or min(p[1], q[1]) > max(ys) + EPS):
            continue
        if _blocked_by(p, q, polygon):
            return False
    return True


# --- vectorized variant used when building coverage graphs -----------------

def _points_strictly_inside(points, polygon):
    """Boolean mask of points strictly inside the polygon (boundary excluded)."""
    x = points[:, 0]
    y = points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    on_edge = np.zeros(len(points), dtype=bool)
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (xc > x)
        dx, dy = x2 - x1, y2 - y1
        length2 = dx * dx + dy * dy
        t = np.clip(((x - x1) * dx + (y - y1) * dy) / length2, 0.0, 1.0)
        dist = np.hypot(x - (x1 + t * dx), y - (y1 + t * dy))
        on_edge |= dist <= EPS
    return inside & ~on_edge


def visible_many(p, targets, obstacles):
    """Vectorized ``visible(p, q, obstacles)`` for every row q of ``targets``.

    Clear-cut cases are decided with array arithmetic; pairs where the sight
    line comes within EPS of a polygon vertex or edge line fall back to the
    scalar predicate so both paths agree exactly.
    """
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    result = np.ones(len(targets), dtype=bool)
    if len(targets) == 0 or not obstacles:
        return result
    px, py = float(p[0]), float(p[1])
    qx = targets[:, 0]
    qy = targets[:, 1]
    seg_len = np.hypot(qx - px, qy - py)
    nondegenerate = seg_len > EPS
    p_arr = np.array([[px, py]])
    for polygon in obstacles:
        poly = np.asarray(polygon, dtype=float)
        xmin, ymin = poly.min(axis=0)
        xmax, ymax = poly.max(axis=0)
        cand = (
            result
            & nondegenerate
            & (np.maximum(px, qx) >= xmin - EPS)
            & (np.minimum(px, qx) <= xmax + EPS)
            & (np.maximum(py, qy) >= ymin - EPS)
            & (np.minimum(py, qy) <= ymax + EPS)
        )
        if not cand.any():
            continue
        idx = np.nonzero(cand)[0]
        cx, cy, cl = qx[idx], qy[idx], seg_len[idx]
        if _points_strictly_inside(p_arr, polygon)[0]:
            result[idx] = False
            continue
        blocked = _points_strictly_inside(targets[idx], polygon)
        degenerate = np.zeros(len(idx), dtype=bool)
        n = len(poly)
        for i in range(n):
            ax, ay = poly[i]
            bx, by = poly[(i + 1) % n]
            elen = math.hypot(bx - ax, by - ay)
            d1 = ((bx - ax) * (py - ay) - (by - ay) * (px - ax)) / elen
            d2 = ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) / elen
            d3 = ((cx - px) * (ay - py) - (cy - py) * (ax - px)) / cl
            d4 = ((cx - px) * (by - py) - (cy - py) * (bx - px)) / cl
            s1 = np.sign(d1) * (abs(d1) > EPS)
            s2 = np.where(np.abs(d2) > EPS, np.sign(d2), 0.0)
            s3 = np.where(np.abs(d3) > EPS, np.sign(d3), 0.0)
            s4 = np.where(np.abs(d4) > EPS, np.sign(d4), 0.0)
            blocked |= (s1 * s2 < 0) & (s3 * s4 < 0)
            # near-contacts with the edge's supporting line inside its span
            touch = (s1 * s2 <= 0) & (s3 * s4 <= 0) & ((s1 * s2 == 0) | (s3 * s4 == 0))
            degenerate |= touch
        fallback = degenerate & ~blocked
        for k in np.nonzero(fallback)[0]:
            blocked[k] = _blocked_by((px, py), (cx[k], cy[k]), [tuple(v) for v in polygon])
        result[idx[blocked]] = False
    return result
