"""Per-frame pipeline: match, disparity, depth, size, cylinder, cloud and grid."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TextIO

from .core import BBox, CameraRig, StereoFrame
from .disparity import compute_disparity
from .errors import StereoError
from .estimator import PolynomialModel, predict_depth, predict_size
from .matching import MatchConfig, match_detections
from .obstacle import (
    DEFAULT_ANGULAR_STEPS,
    DEFAULT_VERTICAL_STEPS,
    CylinderObstacle,
    GridSpec,
    OccupancyGrid,
    PointCloud,
    build_cylinder,
    cylinder_to_pointcloud,
    rasterize,
)

DEFAULT_GRID = GridSpec(resolution=5.0, cols=120, rows=120, origin_x=-300.0, origin_y=0.0)


@dataclass(frozen=True)
class PipelineConfig:
    depth_model: PolynomialModel
    width_model: PolynomialModel
    height_model: PolynomialModel
    rig: CameraRig = CameraRig()
    match: MatchConfig = MatchConfig()
    grid: GridSpec = DEFAULT_GRID
    inflation_radius: float = 10.0
    angular_steps: int = DEFAULT_ANGULAR_STEPS
    vertical_steps: int = DEFAULT_VERTICAL_STEPS


@dataclass(frozen=True)
class ObjectEstimate:
    frame_id: int
    class_id: int
    disparity: float
    depth: float
    width: float
    height: float
    cylinder: CylinderObstacle
    depth_extrapolated: bool
    size_extrapolated: bool


@dataclass
class FrameResult:
    frame_id: int
    objects: list[ObjectEstimate] = field(default_factory=list)
    unmatched_left: list[BBox] = field(default_factory=list)
    unmatched_right: list[BBox] = field(default_factory=list)
    rejected: list[tuple[int, str]] = field(default_factory=list)  # (class_id, reason)
    cloud: PointCloud | None = None
    grid: OccupancyGrid | None = None


def process_frame(frame: StereoFrame, config: PipelineConfig) -> FrameResult:
    """Run every stage on one frame.

    Pairs whose disparity or predicted size is unusable are listed in
    ``rejected`` rather than dropped.
    """
    result = FrameResult(frame.frame_id)
    matches = match_detections(frame, config.match)
    result.unmatched_left = list(matches.unmatched_left)
    result.unmatched_right = list(matches.unmatched_right)

    for index, pair in enumerate(matches.pairs):
        try:
            meas = compute_disparity(pair, index)
            depth, depth_flag = predict_depth(config.depth_model, meas.disparity)
            width, height, size_flag = predict_size(
                config.width_model, config.height_model, depth,
                meas.left_box_width, meas.left_box_height,
            )
            cyl = build_cylinder(depth, width, height, pair.left, config.rig, pair.class_id)
        except StereoError as exc:
            result.rejected.append((pair.class_id, str(exc)))
            continue
        result.objects.append(ObjectEstimate(
            frame.frame_id, pair.class_id, meas.disparity, depth, width, height,
            cyl, depth_flag, size_flag,
        ))

    cylinders = [o.cylinder for o in result.objects]
    result.cloud = PointCloud.concat(
        (cylinder_to_pointcloud(c, config.angular_steps, config.vertical_steps)
         for c in cylinders),
        frame_id=frame.frame_id,
    )
    result.grid = rasterize(cylinders, config.grid, config.inflation_radius)
    return result


# -- report ---------------------------------------------------------------------

REPORT_HEADER = (
    "# OBJ frame class disparity_px depth_cm width_cm height_cm "
    "center_x_cm center_y_cm depth_extrapolated size_extrapolated\n"
    "# UNMATCHED frame side class confidence x_min y_min x_max y_max\n"
    "# REJECTED frame class reason\n"
)


def format_result(result: FrameResult) -> str:
    fid = result.frame_id
    lines = [f"FRAME {fid} {len(result.objects)} "
             f"{len(result.unmatched_left)} {len(result.unmatched_right)}"]
    for o in result.objects:
        c = o.cylinder
        lines.append(
            f"OBJ {fid} {o.class_id} {o.disparity!r} {o.depth!r} {o.width!r} {o.height!r} "
            f"{c.center_x!r} {c.center_y!r} {int(o.depth_extrapolated)} {int(o.size_extrapolated)}"
        )
    for side, boxes in (("L", result.unmatched_left), ("R", result.unmatched_right)):
        for b in boxes:
            lines.append(f"UNMATCHED {fid} {side} {b.class_id} {b.confidence!r} "
                         f"{b.x_min!r} {b.y_min!r} {b.x_max!r} {b.y_max!r}")
    for class_id, reason in result.rejected:
        lines.append(f"REJECTED {fid} {class_id} {reason}")
    return "\n".join(lines) + "\n"


def write_report(results, fp: TextIO) -> None:
    fp.write(REPORT_HEADER)
    for r in results:
        fp.write(format_result(r))


def parse_report(text: str) -> dict[int, dict[str, list]]:
    """Read a report back into {frame_id: {"objects", "unmatched", "rejected"}}."""
    out: dict[int, dict[str, list]] = {}
    for raw in text.splitlines():
        tok = raw.split()
        if not tok or tok[0].startswith("#"):
            continue
        if tok[0] == "FRAME":
            out[int(tok[1])] = {"objects": [], "unmatched": [], "rejected": []}
        elif tok[0] == "OBJ":
            row = dict(class_id=int(tok[2]),
                       **{k: float(v) for k, v in zip(
                           ("disparity", "depth", "width", "height", "center_x", "center_y"),
                           tok[3:9])},
                       depth_extrapolated=tok[9] == "1", size_extrapolated=tok[10] == "1")
            out[int(tok[1])]["objects"].append(row)
        elif tok[0] == "UNMATCHED":
            out[int(tok[1])]["unmatched"].append((tok[2], int(tok[3])))
        elif tok[0] == "REJECTED":
            out[int(tok[1])]["rejected"].append((int(tok[2]), " ".join(tok[3:])))
    return out
