"""Shared domain types and the detection-frame text format.

Conventions: image coordinates in pixels with origin at the top-left corner,
x to the right and y downward. Real-world lengths are in centimeters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .errors import ParseError, StereoError


@dataclass(frozen=True)
class BBox:
    """One detection with sub-pixel corner coordinates.

    The four corners are tl=(x_min, y_min), tr=(x_max, y_min),
    bl=(x_min, y_max) and br=(x_max, y_max).
    """

    class_id: int
    confidence: float
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in coords):
            raise StereoError(f"non-finite box coordinates {coords}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise StereoError(f"degenerate box {coords}")
        if not 0.0 <= self.confidence <= 1.0:
            raise StereoError(f"confidence {self.confidence} outside [0, 1]")
        if self.x_min < 0 or self.y_min < 0:
            raise StereoError(f"negative box coordinates {coords}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center_x(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    @property
    def center_y(self) -> float:
        return 0.5 * (self.y_min + self.y_max)

    @property
    def area(self) -> float:
        return self.width * self.height

    def fits(self, image_width: float, image_height: float) -> bool:
        return self.x_max <= image_width and self.y_max <= image_height


@dataclass(frozen=True)
class StereoFrame:
    frame_id: int
    image_width: int
    image_height: int
    left_detections: tuple[BBox, ...] = ()
    right_detections: tuple[BBox, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "left_detections", tuple(self.left_detections))
        object.__setattr__(self, "right_detections", tuple(self.right_detections))
        if self.image_width <= 0 or self.image_height <= 0:
            raise StereoError("image dimensions must be positive")
        for box in self.left_detections + self.right_detections:
            if not box.fits(self.image_width, self.image_height):
                raise StereoError(
                    f"box {box} exceeds image {self.image_width}x{self.image_height}"
                )


@dataclass(frozen=True)
class CameraRig:
    """Rectified stereo pair. ``baseline`` in cm, the rest in pixels."""

    baseline: float = 20.0
    focal_length: float = 800.0
    principal_point_x: float = 320.0
    image_width: int = 640
    image_height: int = 480

    def __post_init__(self):
        if self.baseline <= 0 or self.focal_length <= 0:
            raise StereoError("baseline and focal_length must be positive")
        if not 0 < self.principal_point_x < self.image_width:
            raise StereoError("principal point must lie inside the image")

    @property
    def horizon_y(self) -> float:
        return 0.5 * self.image_height


def corner_offsets(left: BBox, right: BBox) -> tuple[float, float, float, float]:
    """Signed horizontal offsets (left minus right) for tl, tr, bl, br."""
    dx_min = left.x_min - right.x_min
    dx_max = left.x_max - right.x_max
    return dx_min, dx_max, dx_min, dx_max


@dataclass(frozen=True)
class MatchedPair:
    class_id: int
    left: BBox
    right: BBox
    dx_tl: float = field(default=math.nan)
    dx_tr: float = field(default=math.nan)
    dx_bl: float = field(default=math.nan)
    dx_br: float = field(default=math.nan)

    def __post_init__(self):
        if not (self.left.class_id == self.right.class_id == self.class_id):
            raise StereoError("matched boxes must share the pair's class_id")
        expected = corner_offsets(self.left, self.right)
        stored = self.offsets
        if all(math.isnan(v) for v in stored):
            for name, value in zip(("dx_tl", "dx_tr", "dx_bl", "dx_br"), expected):
                object.__setattr__(self, name, value)
        elif stored != expected:
            raise StereoError(f"stored offsets {stored} disagree with boxes {expected}")

    @classmethod
    def from_boxes(cls, left: BBox, right: BBox) -> "MatchedPair":
        return cls(left.class_id, left, right)

    @property
    def offsets(self) -> tuple[float, float, float, float]:
        return self.dx_tl, self.dx_tr, self.dx_bl, self.dx_br

    @property
    def mean_offset(self) -> float:
        return sum(self.offsets) / 4.0


# -- detection frame text format ---------------------------------------------


def format_frames(frames: Iterable[StereoFrame]) -> str:
    lines = []
    for frame in frames:
        lines.append(f"FRAME {frame.frame_id} {frame.image_width} {frame.image_height}")
        for side, boxes in (("L", frame.left_detections), ("R", frame.right_detections)):
            for b in boxes:
                lines.append(
                    f"DET {side} {b.class_id} {float(b.confidence)!r} "
                    f"{float(b.x_min)!r} {float(b.y_min)!r} {float(b.x_max)!r} {float(b.y_max)!r}"
                )
    return "\n".join(lines) + ("\n" if lines else "")


def write_frames(frames: Iterable[StereoFrame], fp: TextIO, header: str | None = None) -> None:
    if header:
        for line in header.splitlines():
            fp.write(f"# {line}\n")
    fp.write(format_frames(frames))


def parse_frames(text: str | Iterable[str]) -> list[StereoFrame]:
    """Parse FRAME/DET records. Errors carry the offending line number."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    frames: list[StereoFrame] = []
    current: dict | None = None
    start_line = 0

    def close():
        if current is None:
            return
        try:
            frames.append(StereoFrame(**current))
        except StereoError as exc:
            raise ParseError(str(exc), start_line) from None

    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        try:
            if tok[0] == "FRAME":
                if len(tok) != 4:
                    raise ParseError("FRAME expects 3 fields", lineno)
                close()
                current = dict(
                    frame_id=int(tok[1]),
                    image_width=int(tok[2]),
                    image_height=int(tok[3]),
                    left_detections=[],
                    right_detections=[],
                )
                start_line = lineno
            elif tok[0] == "DET":
                if current is None:
                    raise ParseError("DET before any FRAME", lineno)
                if len(tok) != 8 or tok[1] not in ("L", "R"):
                    raise ParseError("DET expects <L|R> class conf x_min y_min x_max y_max", lineno)
                box = BBox(int(tok[2]), *(float(v) for v in tok[3:8]))
                side = "left_detections" if tok[1] == "L" else "right_detections"
                current[side].append(box)
            else:
                raise ParseError(f"unknown record {tok[0]!r}", lineno)
        except ParseError:
            raise
        except (ValueError, StereoError) as exc:
            raise ParseError(str(exc), lineno) from None
    close()
    return frames


def read_frames(path) -> list[StereoFrame]:
    with open(path) as fp:
        return parse_frames(fp.read())
