"""Stereo bounding-box depth and size estimation with obstacle export."""

from .core import BBox, CameraRig, MatchedPair, StereoFrame, corner_offsets
from .disparity import DisparityMeasurement, compute_disparity
from .matching import MatchConfig, MatchResult, match_detections

__version__ = "0.1.0"

__all__ = [
    "BBox", "CameraRig", "DisparityMeasurement", "MatchConfig", "MatchResult",
    "MatchedPair", "StereoFrame", "compute_disparity", "corner_offsets", "match_detections",
]
