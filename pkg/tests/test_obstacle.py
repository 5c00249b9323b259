import io
import math

import numpy as np
import pytest

from stereodepth.errors import InvalidEstimate, InvalidResolution, ParseError
from stereodepth.obstacle import (
    Cell,
    CylinderObstacle,
    GridSpec,
    PointCloud,
    build_cylinder,
    cylinder_to_pointcloud,
    emit_cloud_stream,
    format_grid,
    iter_cloud_stream,
    localize_object,
    parse_cloud_stream,
    parse_grids,
    rasterize,
)
from stereodepth.synthetic import SceneObject, project_object

from conftest import box


def brute_force_grid(obstacles, spec, inflation):
    cells = np.zeros((spec.rows, spec.cols), dtype=np.uint8)
    for r in range(spec.rows):
        y = spec.origin_y + (r + 0.5) * spec.resolution
        for c in range(spec.cols):
            x = spec.origin_x + (c + 0.5) * spec.resolution
            state = Cell.FREE
            for o in obstacles:
                d2 = (x - o.center_x) ** 2 + (y - o.center_y) ** 2
                if d2 <= o.radius ** 2:
                    state = Cell.OCCUPIED
                    break
                if d2 <= (o.radius + inflation) ** 2:
                    state = Cell.INFLATED
            cells[r, c] = state
    return cells


def test_localize_on_axis(rig):
    assert localize_object(123.0, box(300, 340), rig) == (0.0, 123.0)


def test_localize_off_axis(rig):
    assert localize_object(200.0, box(380, 420), rig) == (20.0, 200.0)


def test_localize_recovers_oracle_position(rig):
    rng = np.random.default_rng(0)
    for _ in range(50):
        obj = SceneObject(0, rng.uniform(-20, 20), rng.uniform(150, 400), 10.0, 20.0)
        left, _ = project_object(obj, rig)
        x, y = localize_object(obj.depth, left, rig)
        assert x == pytest.approx(obj.world_x, abs=1e-6)
        assert y == obj.depth


def test_build_cylinder(rig):
    cyl = build_cylinder(200.0, 10.0, 30.0, box(300, 340), rig, class_id=4)
    assert cyl == CylinderObstacle(0.0, 200.0, 10.0, 30.0, 4)
    with pytest.raises(InvalidEstimate):
        build_cylinder(200.0, -1.0, 30.0, box(300, 340), rig)
    with pytest.raises(InvalidEstimate):
        build_cylinder(0.0, 1.0, 30.0, box(300, 340), rig)


def test_pointcloud_compass_points():
    cyl = CylinderObstacle(0.0, 5.0, 2.0, 3.0)
    cloud = cylinder_to_pointcloud(cyl, 4, 2)
    expected = [(1, 5, 0), (0, 6, 0), (-1, 5, 0), (0, 4, 0),
                (1, 5, 3), (0, 6, 3), (-1, 5, 3), (0, 4, 3)]
    np.testing.assert_allclose(cloud.points, expected, atol=1e-12)


@pytest.mark.parametrize("steps", [(36, 10), (3, 2), (17, 5)])
def test_pointcloud_geometry(steps):
    cyl = CylinderObstacle(-12.5, 230.0, 14.0, 22.0)
    cloud = cylinder_to_pointcloud(cyl, *steps)
    assert len(cloud) == steps[0] * steps[1]
    radial = np.hypot(cloud.points[:, 0] - cyl.center_x, cloud.points[:, 1] - cyl.center_y)
    np.testing.assert_allclose(radial, cyl.radius, atol=1e-9, rtol=0)
    assert cloud.points[:, 2].min() == 0 and cloud.points[:, 2].max() == cyl.height


def test_pointcloud_bounding_box():
    cyl = CylinderObstacle(3.0, 120.0, 8.0, 15.0)
    pts = cylinder_to_pointcloud(cyl, 36, 10).points
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    np.testing.assert_allclose(lo, [-1.0, 116.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(hi, [7.0, 124.0, 15.0], atol=1e-9)


def test_pointcloud_rejects_coarse_sampling():
    with pytest.raises(InvalidResolution):
        cylinder_to_pointcloud(CylinderObstacle(0, 1, 1, 1), 2, 5)
    with pytest.raises(InvalidResolution):
        cylinder_to_pointcloud(CylinderObstacle(0, 1, 1, 1), 8, 1)


def test_rasterize_empty():
    spec = GridSpec(5.0, 20, 10, -50.0, 0.0)
    grid = rasterize([], spec, 10.0)
    assert grid.count(Cell.FREE) == 200


def test_rasterize_closed_boundary():
    # cell (row 40, col 11) has center (5, 202.5); cylinder at (0, 202.5) radius 5
    spec = GridSpec(5.0, 21, 81, -52.5, 0.0)
    grid = rasterize([CylinderObstacle(0.0, 202.5, 10.0, 5.0)], spec)
    assert grid.cells[40, 11] == Cell.OCCUPIED
    assert grid.cells[40, 12] == Cell.FREE


@pytest.mark.parametrize("inflation", [0.0, 7.5])
def test_rasterize_matches_brute_force(inflation):
    spec = GridSpec(2.5, 60, 50, -75.0, 50.0)
    obstacles = [CylinderObstacle(-20.0, 100.0, 15.0, 10.0),
                 CylinderObstacle(12.3, 140.7, 9.9, 10.0),
                 CylinderObstacle(16.0, 146.0, 4.0, 1.0)]
    grid = rasterize(obstacles, spec, inflation)
    assert np.array_equal(grid.cells, brute_force_grid(obstacles, spec, inflation))
    if inflation:
        assert grid.count(Cell.INFLATED) > 0


def test_cloud_points_fall_on_occupied_cells():
    # cells whose centers lie just outside the circle can still contain surface
    # points, so a point's own cell or one of its 8 neighbours must be occupied
    cyl = CylinderObstacle(3.3, 151.7, 20.0, 10.0)
    spec = GridSpec(5.0, 40, 40, -50.0, 100.0)
    grid = rasterize([cyl], spec, 0.0)
    cloud = cylinder_to_pointcloud(cyl, 72, 2)
    for x, y, _ in cloud.points:
        c = int((x - spec.origin_x) // spec.resolution)
        r = int((y - spec.origin_y) // spec.resolution)
        patch = grid.cells[max(r - 1, 0):r + 2, max(c - 1, 0):c + 2]
        assert (patch == Cell.OCCUPIED).any()


def test_cloud_stream_round_trip():
    clouds = [
        cylinder_to_pointcloud(CylinderObstacle(1 / 3, 100.1, 7.0, 9.0), 4, 2, frame_id=0),
        PointCloud(np.empty((0, 3)), frame_id=1),
        cylinder_to_pointcloud(CylinderObstacle(-5.0, 80.0, 3.0, 4.0), 5, 3, frame_id=2),
    ]
    sink = io.StringIO()
    assert emit_cloud_stream(clouds, sink) == 3
    text = sink.getvalue()
    assert "CLOUD 1 0\nEND\n" in text
    assert text.count("\nP ") + text.startswith("P ") == 8 + 15
    back = parse_cloud_stream(text)
    assert [c.frame_id for c in back] == [0, 1, 2]
    for a, b in zip(clouds, back):
        assert np.array_equal(a.points, b.points)


def test_cloud_stream_flushes_per_frame():
    class Sink(io.StringIO):
        flushes = 0

        def flush(self):
            self.flushes += 1

    sink = Sink()
    cloud = PointCloud(np.zeros((2, 3)))
    emit_cloud_stream([cloud, cloud], sink)
    assert sink.flushes == 2


def test_cloud_stream_is_incremental():
    lines = iter(["CLOUD 0 1", "P 1 2 3", "END", "CLOUD 1 1"])
    stream = iter_cloud_stream(lines)
    first = next(stream)
    assert first.frame_id == 0 and first.points.tolist() == [[1, 2, 3]]
    with pytest.raises(ParseError):
        next(stream)


@pytest.mark.parametrize("text", [
    "CLOUD 0 2\nP 1 2 3\nEND\n",
    "P 1 2 3\n",
    "CLOUD 0 1\nP 1 2\nEND\n",
    "END\n",
])
def test_cloud_stream_errors(text):
    with pytest.raises(ParseError):
        parse_cloud_stream(text)


def test_grid_round_trip():
    spec = GridSpec(2.5, 30, 20, -37.5, 10.0)
    grid = rasterize([CylinderObstacle(0.0, 35.0, 10.0, 5.0)], spec, 5.0)
    text = format_grid(grid)
    assert text.splitlines()[0] == "GRID 30 20 2.5 -37.5 10.0"
    assert set("".join(text.splitlines()[1:])) == {".", "#", "+"}
    (back,) = parse_grids(text)
    assert back == grid
    assert parse_grids(text + text) == [grid, grid]


@pytest.mark.parametrize("text", ["GRID 2 2 1 0 0\n..\n", "GRID 2 1 1 0 0\n.x\n", "GRID 2 1 0 0 0\n..\n"])
def test_grid_parse_errors(text):
    with pytest.raises(ParseError):
        parse_grids(text)


def test_invalid_grid_spec():
    with pytest.raises(InvalidResolution):
        GridSpec(0.0, 10, 10, 0, 0)
