import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from lidar_cover import Scene, Wall, generate_real, generate_toy, toy_instance
from lidar_cover.errors import ValidationError
from lidar_cover.geometry import point_in_polygon
from lidar_cover.scene import TOY_FAMILY, template_names


def test_toy_1_counts():
    scene = toy_instance(1)
    assert len(scene.lidar_positions()) == 2
    assert len(scene.grid_points()) == 2


def test_toy_11_counts():
    scene = toy_instance(11)
    assert len(scene.lidar_positions()) == 22
    assert len(scene.grid_points()) == 33


def test_toy_family_grows():
    sizes = [len(toy_instance(n).lidar_positions()) + len(toy_instance(n).grid_points())
             for n in range(1, len(TOY_FAMILY) + 1)]
    assert sizes == sorted(sizes)


@pytest.mark.parametrize("kwargs, field", [
    ({"layers": 0}, "layers"),
    ({"layers": 2, "street_rows": 4}, "street_rows"),
    ({"layers": 2, "walls": 3}, "walls"),
    ({"layers": 2, "sensor_range": 0.0}, "sensor_range"),
])
def test_toy_rejects_bad_parameters(kwargs, field):
    with pytest.raises(ValidationError) as info:
        generate_toy(**kwargs)
    assert info.value.field == field


def test_wall_mounts_spaced_and_centred():
    mounts = Wall(0.0, 0.0, 10.0, 0.0, 3.0).mounts()
    assert [round(x, 9) for x, _ in mounts] == [2.0, 5.0, 8.0]


def test_short_wall_gets_one_mount():
    assert Wall(0.0, 0.0, 1.0, 0.0, 3.0).mounts() == [(0.5, 0.0)]


def test_bowtie_obstacle_rejected():
    with pytest.raises(ValidationError):
        Scene(width=10, height=10, obstacles=[[(1, 1), (3, 3), (3, 1), (1, 3)]])


def test_out_of_bounds_pillar_rejected():
    with pytest.raises(ValidationError) as info:
        Scene(width=10, height=10, pillars=[(11, 5)])
    assert info.value.field == "pillars"


def test_grid_excludes_obstacles_and_boundary():
    block = [(2.0, 2.0), (6.0, 2.0), (6.0, 6.0), (2.0, 6.0)]
    scene = Scene(width=10, height=10, obstacles=[block], street_grid_spacing=1.0)
    pts = scene.grid_points()
    assert all(point_in_polygon(p, block) == -1 for p in pts)
    assert all(0 < x < 10 and 0 < y < 10 for x, y in pts)
    # 9x9 interior lattice minus the 5x5 block including its boundary
    assert len(pts) == 81 - 25


def test_scene_json_round_trip():
    scene = generate_real("real-3")
    again = Scene.loads(scene.dumps())
    assert again == scene
    assert again.dumps() == scene.dumps()


def test_scene_json_keys():
    data = json.loads(toy_instance(2).dumps())
    assert {"width", "height", "walls", "pillars", "obstacles", "street_grid_spacing",
            "sensor_range"} <= set(data)


def test_all_templates_generate():
    names = template_names()
    assert [f"real-{k}" for k in range(1, 13)] == sorted(names, key=lambda n: int(n[5:]))
    for name in names:
        scene = generate_real(name)
        assert scene.grid_points()
        assert math.isclose(scene.street_grid_spacing * 5, scene.walls[0].spacing)


def test_real_alias():
    assert generate_real("real-small").dumps() == generate_real("real-1").dumps()


def test_unknown_template():
    with pytest.raises(ValidationError):
        generate_real("real-99")


def test_density_ratio_refines_grid():
    coarse = generate_real("real-2", density_ratio=2).grid_points()
    fine = generate_real("real-2", density_ratio=4).grid_points()
    assert set(coarse) <= {(round(x, 6), round(y, 6)) for x, y in fine} or len(fine) > len(coarse)


@settings(max_examples=40, deadline=None)
@given(layers=st.integers(1, 12), rows=st.integers(1, 3), walls=st.integers(1, 2))
def test_toy_generator_counts(layers, rows, walls):
    scene = generate_toy(layers, rows, walls)
    assert len(scene.lidar_positions()) == layers * walls
    assert len(scene.grid_points()) == layers * rows
    assert Scene.loads(scene.dumps()) == scene
