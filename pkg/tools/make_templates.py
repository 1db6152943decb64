"""Generate the bundled real-hall templates.

Halls are rectangles of ``a x b`` LiDAR spacings with mounts on all four
perimeter walls, rectangular production blocks (occluders) and pillars.
Block extents are given in street-grid indices; a block covering indices
i0..i1 x j0..j1 occupies [(i0-1/2)g, (i1+1/2)g] x [(j0-1/2)g, (j1+1/2)g].

Usage: python tools/make_templates.py [--check]
"""

import argparse
import json
import sys
from pathlib import Path

SPACING = 33.3
RATIO = 5
OUT = Path(__file__).resolve().parents[1] / "src" / "lidar_cover" / "templates"


def hall(label, a, b, blocks, pillars, sensor_range):
    g = SPACING / RATIO
    w, h = a * SPACING, b * SPACING
    walls = [
        {"x1": 0.0, "y1": 0.0, "x2": w, "y2": 0.0},
        {"x1": w, "y1": 0.0, "x2": w, "y2": h},
        {"x1": w, "y1": h, "x2": 0.0, "y2": h},
        {"x1": 0.0, "y1": h, "x2": 0.0, "y2": 0.0},
    ]
    obstacles = []
    for i0, j0, i1, j1 in blocks:
        x0, y0 = (i0 - 0.5) * g, (j0 - 0.5) * g
        x1, y1 = (i1 + 0.5) * g, (j1 + 0.5) * g
        obstacles.append([[round(x0, 6), round(y0, 6)], [round(x1, 6), round(y0, 6)],
                          [round(x1, 6), round(y1, 6)], [round(x0, 6), round(y1, 6)]])
    return {
        "label": label,
        "width": round(w, 6),
        "height": round(h, 6),
        "lidar_spacing": SPACING,
        "density_ratio": RATIO,
        "sensor_range": sensor_range,
        "walls": walls,
        "pillars": [{"x": round(px * g, 6), "y": round(py * g, 6)} for px, py in pillars],
        "obstacles": obstacles,
    }


def block_grid(a, b, nbx, nby, bw, bh):
    """nbx x nby equal blocks of bw x bh grid points, centred with equal aisles."""
    nx, ny = RATIO * a - 1, RATIO * b - 1
    gx = (nx - nbx * bw) // (nbx + 1)
    gy = (ny - nby * bh) // (nby + 1)
    ox = (nx - nbx * bw - (nbx - 1) * gx) // 2 + 1
    oy = (ny - nby * bh - (nby - 1) * gy) // 2 + 1
    blocks = []
    for bx in range(nbx):
        for by in range(nby):
            i0 = ox + bx * (bw + gx)
            j0 = oy + by * (bh + gy)
            blocks.append((i0, j0, i0 + bw - 1, j0 + bh - 1))
    return blocks


def corner_pillars(blocks, count):
    """Pillars on block corners, then edge midpoints, round-robin over blocks."""
    corners = []
    for i0, j0, i1, j1 in blocks:
        xm, ym = 0.5 * (i0 + i1), 0.5 * (j0 + j1)
        corners.append([(i0 - 0.5, j0 - 0.5), (i1 + 0.5, j1 + 0.5),
                        (i1 + 0.5, j0 - 0.5), (i0 - 0.5, j1 + 0.5),
                        (xm, j0 - 0.5), (xm, j1 + 0.5), (i0 - 0.5, ym), (i1 + 0.5, ym)])
    out = []
    k = 0
    while len(out) < count:
        c = corners[k % len(corners)][k // len(corners)]
        out.append(c)
        k += 1
    return out


def real_1():
    # corridor of 18 street points along the bottom wall, hall interior occupied
    blocks = [(1, 2, 29, 14), (19, 1, 29, 1)]
    # five pillars face the corridor; seven stand on the block's far face
    pillars = [(2.5 + 3.0 * k, 1.5) for k in range(5)] + [(2.0 + 2.0 * k, 14.5) for k in range(7)]
    return hall("real-1", 6, 3, blocks, pillars, 11.5)


# (label, a, b, blocks x, blocks y, block w, block h, pillars, sensor range)
FAMILY = [
    ("real-2", 6, 3, 2, 1, 12, 10, 14, 20.0),
    ("real-3", 6, 4, 2, 1, 11, 12, 14, 30.0),
    ("real-4", 7, 4, 2, 2, 12, 6, 12, 40.0),
    ("real-5", 8, 4, 3, 2, 9, 6, 12, 40.0),
    ("real-6", 8, 5, 3, 2, 9, 8, 12, 38.0),
    ("real-7", 9, 5, 3, 2, 10, 8, 12, 40.0),
    ("real-8", 10, 5, 3, 2, 11, 8, 10, 60.0),
    ("real-9", 10, 6, 3, 2, 11, 9, 10, 60.0),
    ("real-10", 11, 6, 4, 2, 9, 9, 10, 60.0),
    ("real-11", 12, 7, 4, 2, 9, 10, 8, 60.0),
]


def real_12():
    # one central production block leaves 2210 street points
    blocks = [(17, 14, 53, 26)]
    pillars = [(16.5, 13.5), (53.5, 13.5), (16.5, 26.5), (53.5, 26.5),
               (35.0, 13.5), (35.0, 26.5), (16.5, 20.0), (53.5, 20.0)]
    return hall("real-12", 14, 8, blocks, pillars, 67.2)


def build_all():
    layouts = [real_1()]
    for label, a, b, nbx, nby, bw, bh, npil, r in FAMILY:
        blocks = block_grid(a, b, nbx, nby, bw, bh)
        layouts.append(hall(label, a, b, blocks, corner_pillars(blocks, npil), r))
    layouts.append(real_12())
    return layouts


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--check", action="store_true", help="print instance sizes only")
    args = parser.parse_args(argv)
    layouts = build_all()
    if args.check:
        sys.path.insert(0, str(OUT.parents[1]))
        from lidar_cover.graph import build_coverage_graph
        from lidar_cover.qubo import build_qubo
        from lidar_cover.scene import generate_real
        for layout in layouts:
            g = build_coverage_graph(generate_real(layout))
            ok = g.feasible
            nb = build_qubo(g, "binary", 1.0).num_vars if ok else None
            print(f"{layout['label']:8s} lidars={g.num_lidars:3d} streets={g.num_streets:5d} "
                  f"feasible={ok} binary_vars={nb}")
        return
    OUT.mkdir(parents=True, exist_ok=True)
    for layout in layouts:
        path = OUT / f"{layout['label']}.json"
        path.write_text(json.dumps(layout, indent=2, sort_keys=True) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
