"""Left/right detection association for a rectified stereo pair."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import groupby

from .core import BBox, MatchedPair, StereoFrame, corner_offsets
from .errors import StereoError


@dataclass(frozen=True)
class MatchConfig:
    """Compatibility gates, all in pixels.

    Width and height defaults reflect the largest left/right box size
    differences seen with a real detector (3 px wide, 8 px tall).
    """

    max_vertical_offset: float = 8.0
    max_width_diff: float = 3.0
    max_height_diff: float = 8.0
    require_positive_disparity: bool = True

    def __post_init__(self):
        if min(self.max_vertical_offset, self.max_width_diff, self.max_height_diff) < 0:
            raise StereoError("match tolerances must be non-negative")


@dataclass(frozen=True)
class MatchResult:
    pairs: list[MatchedPair] = field(default_factory=list)
    unmatched_left: list[BBox] = field(default_factory=list)
    unmatched_right: list[BBox] = field(default_factory=list)


def sort_key(box: BBox) -> tuple:
    # center x, then y_min, then area; the remaining fields only make the
    # order total so that shuffled input cannot change the result.
    return (box.center_x, box.y_min, box.area, box.x_min, box.y_max, box.confidence)


def compatible(left: BBox, right: BBox, config: MatchConfig) -> bool:
    if left.class_id != right.class_id:
        return False
    if abs(left.y_min - right.y_min) > config.max_vertical_offset:
        return False
    if abs(left.width - right.width) > config.max_width_diff:
        return False
    if abs(left.height - right.height) > config.max_height_diff:
        return False
    if config.require_positive_disparity and sum(corner_offsets(left, right)) <= 0:
        return False
    return True


def _order_preserving_match(left, right, config):
    """Largest order-preserving set of compatible pairs.

    Classic LCS table; among equally long matchings the one with the smaller
    total |dy| wins, remaining ties prefer matching earlier boxes.
    """
    n, m = len(left), len(right)
    # best[i][j] = (count, -sum|dy|) achievable on left[i:], right[j:]
    best = [[(0, 0.0)] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            cand = max(best[i + 1][j], best[i][j + 1])
            if compatible(left[i], right[j], config):
                c, s = best[i + 1][j + 1]
                took = (c + 1, s - abs(left[i].y_min - right[j].y_min))
                if took >= cand:
                    cand = took
            best[i][j] = cand

    pairs = []
    i = j = 0
    while i < n and j < m:
        if compatible(left[i], right[j], config):
            c, s = best[i + 1][j + 1]
            if (c + 1, s - abs(left[i].y_min - right[j].y_min)) == best[i][j]:
                pairs.append((i, j))
                i += 1
                j += 1
                continue
        if best[i + 1][j] == best[i][j]:
            i += 1
        else:
            j += 1
    return pairs


def match_detections(frame: StereoFrame, config: MatchConfig | None = None) -> MatchResult:
    """Pair left and right detections that image the same object.

    Within each class both sides are sorted by box center x. Equal counts
    are paired index by index and incompatible pairs demoted to unmatched;
    unequal counts use the longest order-preserving compatible matching.
    """
    config = config or MatchConfig()
    cls = lambda b: b.class_id  # noqa: E731
    left_by_class = {k: sorted(g, key=sort_key)
                     for k, g in groupby(sorted(frame.left_detections, key=cls), cls)}
    right_by_class = {k: sorted(g, key=sort_key)
                      for k, g in groupby(sorted(frame.right_detections, key=cls), cls)}

    pairs: list[MatchedPair] = []
    unmatched_left: list[BBox] = []
    unmatched_right: list[BBox] = []
    for class_id in sorted(set(left_by_class) | set(right_by_class)):
        left = left_by_class.get(class_id, [])
        right = right_by_class.get(class_id, [])
        if len(left) == len(right):
            index_pairs = [(i, i) for i in range(len(left))
                           if compatible(left[i], right[i], config)]
        else:
            index_pairs = _order_preserving_match(left, right, config)
        used_l = {i for i, _ in index_pairs}
        used_r = {j for _, j in index_pairs}
        pairs.extend(MatchedPair.from_boxes(left[i], right[j]) for i, j in index_pairs)
        unmatched_left.extend(b for i, b in enumerate(left) if i not in used_l)
        unmatched_right.extend(b for j, b in enumerate(right) if j not in used_r)

    pairs.sort(key=lambda p: (p.class_id, sort_key(p.left)))
    return MatchResult(pairs, unmatched_left, unmatched_right)
