"""Cylindrical obstacles, their surface point clouds, and a tri-state costmap.

Robot frame: x lateral (positive to the right), y forward, z up, origin at
the left camera's optical center. The rig-to-robot transform is the
identity. All lengths are centimeters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

import numpy as np

from .core import BBox, CameraRig
from .errors import InvalidEstimate, InvalidResolution, ParseError, StereoError

DEFAULT_ANGULAR_STEPS = 36
DEFAULT_VERTICAL_STEPS = 10


class Cell(enum.IntEnum):
    FREE = 0
    OCCUPIED = 1
    INFLATED = 2


CELL_CHARS = {Cell.FREE: ".", Cell.OCCUPIED: "#", Cell.INFLATED: "+"}
_CHAR_CELLS = {v: k for k, v in CELL_CHARS.items()}


@dataclass(frozen=True)
class CylinderObstacle:
    center_x: float
    center_y: float
    diameter: float
    height: float
    class_id: int = 0

    def __post_init__(self):
        if not (self.diameter > 0 and self.height > 0 and self.center_y > 0):
            raise InvalidEstimate(
                f"cylinder needs positive diameter, height and forward position: {self}"
            )
        if not (math.isfinite(self.center_x) and math.isfinite(self.center_y)):
            raise InvalidEstimate("cylinder center must be finite")

    @property
    def radius(self) -> float:
        return 0.5 * self.diameter


@dataclass(frozen=True, eq=False)
class PointCloud:
    """(N, 3) array of robot-frame points."""

    points: np.ndarray
    frame_id: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise StereoError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @staticmethod
    def concat(clouds: Iterable["PointCloud"], frame_id: int = 0) -> "PointCloud":
        arrays = [c.points for c in clouds]
        return PointCloud(np.vstack(arrays) if arrays else np.empty((0, 3)), frame_id)


@dataclass(frozen=True)
class GridSpec:
    resolution: float
    cols: int
    rows: int
    origin_x: float
    origin_y: float

    def __post_init__(self):
        if not self.resolution > 0:
            raise InvalidResolution("grid resolution must be positive")
        if self.cols <= 0 or self.rows <= 0:
            raise InvalidResolution("grid must have at least one cell")

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable (rows, 1) y and (1, cols) x arrays of cell centers."""
        xs = self.origin_x + (np.arange(self.cols) + 0.5) * self.resolution
        ys = self.origin_y + (np.arange(self.rows) + 0.5) * self.resolution
        return ys[:, None], xs[None, :]


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Row-major cell states; row 0 is nearest the origin (smallest y)."""

    spec: GridSpec
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.uint8)
        if cells.shape != (self.spec.rows, self.spec.cols):
            raise StereoError(f"cells shape {cells.shape} != ({self.spec.rows}, {self.spec.cols})")
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.cells, other.cells)

    def count(self, state: Cell) -> int:
        return int(np.count_nonzero(self.cells == state))


def localize_object(depth: float, left_box: BBox, rig: CameraRig) -> tuple[float, float]:
    """Back-project the left box center to a ground position (center_x, center_y)."""
    if not depth > 0:
        raise InvalidEstimate(f"depth must be positive, got {depth}")
    center_x = (left_box.center_x - rig.principal_point_x) * depth / rig.focal_length
    return center_x, depth


def build_cylinder(depth: float, width: float, height: float, left_box: BBox,
                   rig: CameraRig, class_id: int = 0) -> CylinderObstacle:
    if not (depth > 0 and width > 0 and height > 0):
        raise InvalidEstimate(
            f"estimates must be positive: depth={depth}, width={width}, height={height}"
        )
    cx, cy = localize_object(depth, left_box, rig)
    return CylinderObstacle(cx, cy, diameter=width, height=height, class_id=class_id)


def cylinder_to_pointcloud(cyl: CylinderObstacle,
                           angular_steps: int = DEFAULT_ANGULAR_STEPS,
                           vertical_steps: int = DEFAULT_VERTICAL_STEPS,
                           frame_id: int = 0) -> PointCloud:
    """Sample the lateral surface on a regular (angle, height) lattice.

    Rings run from z=0 to z=height inclusive; end caps are not sampled.
    Points are ordered ring by ring, angle fastest.
    """
    if angular_steps < 3 or vertical_steps < 2:
        raise InvalidResolution(
            f"need angular_steps >= 3 and vertical_steps >= 2, "
            f"got {angular_steps}, {vertical_steps}"
        )
    theta = 2.0 * np.pi * np.arange(angular_steps) / angular_steps
    z = cyl.height * np.arange(vertical_steps) / (vertical_steps - 1)
    r = cyl.radius
    ring = np.column_stack([cyl.center_x + r * np.cos(theta), cyl.center_y + r * np.sin(theta)])
    points = np.empty((vertical_steps * angular_steps, 3))
    points[:, :2] = np.tile(ring, (vertical_steps, 1))
    points[:, 2] = np.repeat(z, angular_steps)
    return PointCloud(points, frame_id)


def rasterize(obstacles: Iterable[CylinderObstacle], spec: GridSpec,
              inflation_radius: float = 0.0) -> OccupancyGrid:
    """Mark cells by where their centers fall relative to each cylinder footprint.

    OCCUPIED within the radius (boundary included), INFLATED within
    radius + inflation_radius, FREE elsewhere. OCCUPIED wins over INFLATED.
    """
    if inflation_radius < 0:
        raise StereoError("inflation_radius must be non-negative")
    ys, xs = spec.cell_centers()
    occupied = np.zeros((spec.rows, spec.cols), dtype=bool)
    inflated = np.zeros_like(occupied)
    for cyl in obstacles:
        dx = xs - cyl.center_x
        dy = ys - cyl.center_y
        # squared distances avoid sqrt rounding at the closed boundary
        d2 = dx * dx + dy * dy
        r = cyl.radius
        ri = r + inflation_radius
        occupied |= d2 <= r * r
        inflated |= d2 <= ri * ri
    cells = np.full((spec.rows, spec.cols), Cell.FREE, dtype=np.uint8)
    cells[inflated] = Cell.INFLATED
    cells[occupied] = Cell.OCCUPIED
    return OccupancyGrid(spec, cells)


# -- CLOUD stream ---------------------------------------------------------------


def format_cloud(cloud: PointCloud) -> str:
    lines = [f"CLOUD {cloud.frame_id} {len(cloud)}"]
    lines += [f"P {float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in cloud.points]
    lines.append("END")
    return "\n".join(lines) + "\n"


def emit_cloud_stream(clouds: Iterable[PointCloud], sink: TextIO) -> int:
    """Write one CLOUD block per cloud, flushing after each. Returns blocks written."""
    n = 0
    for cloud in clouds:
        sink.write(format_cloud(cloud))
        sink.flush()
        n += 1
    return n


def iter_cloud_stream(lines: Iterable[str]) -> Iterator[PointCloud]:
    """Incrementally parse a CLOUD stream, yielding each completed frame."""
    header = None
    points: list[tuple[float, float, float]] = []
    for lineno, raw in enumerate(lines, 1):
        tok = raw.split()
        if not tok or tok[0].startswith("#"):
            continue
        try:
            if tok[0] == "CLOUD":
                if header is not None:
                    raise ParseError("CLOUD before END of previous block", lineno)
                if len(tok) != 3:
                    raise ParseError("CLOUD expects <frame_id> <point_count>", lineno)
                header = (int(tok[1]), int(tok[2]), lineno)
                points = []
            elif tok[0] == "P":
                if header is None or len(tok) != 4:
                    raise ParseError("malformed point record", lineno)
                points.append((float(tok[1]), float(tok[2]), float(tok[3])))
            elif tok[0] == "END":
                if header is None:
                    raise ParseError("END without CLOUD", lineno)
                frame_id, count, start = header
                if count != len(points):
                    raise ParseError(f"declared {count} points, found {len(points)}", start)
                yield PointCloud(np.array(points, dtype=float).reshape(-1, 3), frame_id)
                header = None
            else:
                raise ParseError(f"unknown record {tok[0]!r}", lineno)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if header is not None:
        raise ParseError("stream ended inside a CLOUD block", header[2])


def parse_cloud_stream(text: str) -> list[PointCloud]:
    return list(iter_cloud_stream(text.splitlines()))


# -- GRID export ----------------------------------------------------------------


def format_grid(grid: OccupancyGrid) -> str:
    s = grid.spec
    lines = [f"GRID {s.cols} {s.rows} {float(s.resolution)!r} "
             f"{float(s.origin_x)!r} {float(s.origin_y)!r}"]
    table = np.array([CELL_CHARS[Cell(v)] for v in range(3)])
    lines += ["".join(row) for row in table[grid.cells]]
    return "\n".join(lines) + "\n"


def parse_grids(text: str) -> list[OccupancyGrid]:
    """Parse one or more concatenated GRID blocks."""
    lines = text.splitlines()
    grids = []
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line or line.startswith("#"):
            i += 1
            continue
        tok = line.split()
        if tok[0] != "GRID" or len(tok) != 6:
            raise ParseError("expected GRID <cols> <rows> <resolution> <origin_x> <origin_y>", i + 1)
        try:
            spec = GridSpec(float(tok[3]), int(tok[1]), int(tok[2]), float(tok[4]), float(tok[5]))
        except (ValueError, StereoError) as exc:
            raise ParseError(str(exc), i + 1) from None
        rows = lines[i + 1:i + 1 + spec.rows]
        if len(rows) != spec.rows:
            raise ParseError(f"expected {spec.rows} grid rows", i + 1)
        cells = np.empty((spec.rows, spec.cols), dtype=np.uint8)
        for r, row in enumerate(rows):
            if len(row) != spec.cols or any(ch not in _CHAR_CELLS for ch in row):
                raise ParseError("bad grid row", i + 2 + r)
            cells[r] = [_CHAR_CELLS[ch] for ch in row]
        grids.append(OccupancyGrid(spec, cells))
        i += 1 + spec.rows
    return grids
