"""Per-object disparity from a matched box pair."""

from __future__ import annotations

from dataclasses import dataclass

from .core import MatchedPair
from .errors import NonPositiveDisparity


@dataclass(frozen=True)
class DisparityMeasurement:
    pair_index: int
    class_id: int
    disparity: float
    left_box_width: float
    left_box_height: float


def compute_disparity(pair: MatchedPair, pair_index: int = 0) -> DisparityMeasurement:
    """Average the four corner offsets of ``pair``.

    The left box is the reference view for the pixel extents carried along
    for size estimation.

    Raises
    ------
    NonPositiveDisparity
        If the mean offset is zero or negative.
    """
    dx_tl, dx_tr, dx_bl, dx_br = pair.offsets
    disparity = 0.25 * (dx_tl + dx_tr + dx_bl + dx_br)
    if not disparity > 0:
        raise NonPositiveDisparity(
            f"pair {pair_index} (class {pair.class_id}) has disparity {disparity}"
        )
    return DisparityMeasurement(
        pair_index=pair_index,
        class_id=pair.class_id,
        disparity=disparity,
        left_box_width=pair.left.width,
        left_box_height=pair.left.height,
    )
