"""Pinhole stereo oracle: exact projections, seeded noise, training datasets.

All randomness comes from ``numpy.random.default_rng`` (PCG64) seeded with
the integer recorded in every file header this module produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import BBox, CameraRig, StereoFrame
from .errors import OutOfFrame, ParseError, StereoError
from .estimator.training import DepthSample, SizeSample

RNG_NAME = "numpy.random.PCG64"


@dataclass(frozen=True)
class SceneObject:
    class_id: int
    world_x: float
    depth: float
    real_width: float
    real_height: float

    def __post_init__(self):
        if not (self.depth > 0 and self.real_width > 0 and self.real_height > 0):
            raise StereoError(f"scene object needs positive depth and extents: {self}")


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian noise on every box coordinate.

    The standard deviation at depth ``Z`` is ``pixel_sigma + sigma_per_cm * Z``.
    """

    pixel_sigma: float = 0.5
    seed: int = 0
    sigma_per_cm: float = 0.0

    def __post_init__(self):
        if self.pixel_sigma < 0 or self.sigma_per_cm < 0:
            raise StereoError("noise levels must be non-negative")

    def sigma_at(self, depth):
        return self.pixel_sigma + self.sigma_per_cm * np.asarray(depth, dtype=float)


NOISE_FREE = NoiseSpec(pixel_sigma=0.0)


def provenance(rig: CameraRig, noise: NoiseSpec, seed: int) -> list[str]:
    r = rig
    sigma = f"{noise.pixel_sigma!r}"
    if noise.sigma_per_cm:
        sigma += f"+{noise.sigma_per_cm!r}/cm"
    return [
        f"seed={seed} sigma={sigma} rig={r.focal_length!r},{r.baseline!r},"
        f"{r.principal_point_x!r},{r.image_width},{r.image_height}",
        f"rng={RNG_NAME}",
    ]


def _box_coords(center_x, center_y, width, height):
    return (center_x - 0.5 * width, center_y - 0.5 * height,
            center_x + 0.5 * width, center_y + 0.5 * height)


def project_object(obj: SceneObject, rig: CameraRig, confidence: float = 1.0
                   ) -> tuple[BBox, BBox]:
    """Exact left/right boxes of ``obj``, vertically centered on the horizon row.

    Raises
    ------
    OutOfFrame
        If either box leaves its image.
    """
    f = rig.focal_length
    z = obj.depth
    w = f * obj.real_width / z
    h = f * obj.real_height / z
    cx_left = rig.principal_point_x + f * obj.world_x / z
    cx_right = cx_left - f * rig.baseline / z
    boxes = []
    for cx in (cx_left, cx_right):
        x0, y0, x1, y1 = _box_coords(cx, rig.horizon_y, w, h)
        if x0 < 0 or y0 < 0 or x1 > rig.image_width or y1 > rig.image_height:
            raise OutOfFrame(f"{obj} projects outside the {rig.image_width}x{rig.image_height} image")
        boxes.append(BBox(obj.class_id, confidence, x0, y0, x1, y1))
    return boxes[0], boxes[1]


def generate_frame(objects: Sequence[SceneObject], rig: CameraRig,
                   noise: NoiseSpec = NoiseSpec(), frame_id: int = 0
                   ) -> tuple[StereoFrame, list[tuple[int, int]]]:
    """Project, perturb and shuffle a scene.

    Returns the frame and the true association as (left index, right index)
    pairs into the frame's detection lists, ordered by left index. Noisy
    coordinates are clipped to the image.
    """
    rng = np.random.default_rng(noise.seed)
    exact = [project_object(o, rig) for o in objects]
    lefts, rights = [], []
    for obj, pair in zip(objects, exact):
        sigma = float(noise.sigma_at(obj.depth))
        for box, bucket in zip(pair, (lefts, rights)):
            coords = np.array([box.x_min, box.y_min, box.x_max, box.y_max])
            if sigma > 0:
                coords = coords + rng.normal(0.0, sigma, 4)
            coords = np.clip(coords, 0.0, [rig.image_width, rig.image_height] * 2)
            bucket.append(BBox(box.class_id, box.confidence, *map(float, coords)))
    n = len(objects)
    perm_l = rng.permutation(n)
    perm_r = rng.permutation(n)
    frame = StereoFrame(frame_id, rig.image_width, rig.image_height,
                        [lefts[i] for i in perm_l], [rights[i] for i in perm_r])
    pos_l = np.argsort(perm_l)
    pos_r = np.argsort(perm_r)
    association = sorted((int(pos_l[k]), int(pos_r[k])) for k in range(n))
    return frame, association


def random_scene(rig: CameraRig, n_objects: int, seed: int, n_classes: int = 2,
                 depth_range=(100.0, 400.0), width_range=(5.0, 20.0),
                 height_range=(5.0, 30.0), min_separation: float = 10.0,
                 margin: float = 4.0, max_tries: int = 10000) -> list[SceneObject]:
    """Random objects that fit both images.

    Same-class objects keep the same left-to-right order in both views with
    at least ``min_separation`` px between their box centers, so sorted
    matching is unambiguous.
    """
    rng = np.random.default_rng(seed)
    f, b = rig.focal_length, rig.baseline
    objects: list[SceneObject] = []
    placed: list[tuple[int, float, float]] = []  # class, left cx, right cx
    tries = 0
    while len(objects) < n_objects:
        tries += 1
        if tries > max_tries:
            raise StereoError(f"could not place {n_objects} objects after {max_tries} tries")
        z = rng.uniform(*depth_range)
        w_real = rng.uniform(*width_range)
        h_real = rng.uniform(*height_range)
        cls = int(rng.integers(n_classes))
        d = f * b / z
        w = f * w_real / z
        lo = d + 0.5 * w + margin
        hi = rig.image_width - 0.5 * w - margin
        if lo >= hi or f * h_real / z > rig.image_height - 2 * margin:
            continue
        cx_l = rng.uniform(lo, hi)
        cx_r = cx_l - d
        clash = False
        for c2, l2, r2 in placed:
            if c2 != cls:
                continue
            dl, dr = cx_l - l2, cx_r - r2
            if abs(dl) < min_separation or abs(dr) < min_separation or dl * dr < 0:
                clash = True
                break
        if clash:
            continue
        placed.append((cls, cx_l, cx_r))
        objects.append(SceneObject(cls, (cx_l - rig.principal_point_x) * z / f, z, w_real, h_real))
    return objects


def _check_range(name, rng_tuple):
    lo, hi = rng_tuple
    if not (0 < lo < hi):
        raise StereoError(f"{name} must satisfy 0 < min < max, got {rng_tuple}")


def _disparity_noise(rng, sigma):
    """Corner-mean disparity error from perturbing the x-coordinates of both boxes."""
    e = rng.normal(0.0, 1.0, (len(sigma), 4)) * sigma[:, None]
    # columns: left x_min, left x_max, right x_min, right x_max
    dx_min = e[:, 0] - e[:, 2]
    dx_max = e[:, 1] - e[:, 3]
    return 0.25 * (dx_min + dx_max + dx_min + dx_max)


def generate_depth_dataset(rig: CameraRig, n: int, depth_range=(50.0, 500.0),
                           noise: NoiseSpec = NOISE_FREE, seed: int | None = None,
                           depth_sigma: float = 0.0) -> list[DepthSample]:
    """(disparity, depth) samples with depth uniform in ``depth_range``.

    Box noise enters the disparity through the corner-offset mean; optional
    ``depth_sigma`` adds Gaussian noise to the recorded depth. Samples whose
    noisy disparity or depth is not positive are redrawn. ``seed`` defaults
    to ``noise.seed``.
    """
    _check_range("depth_range", depth_range)
    if n < 0:
        raise StereoError("n must be non-negative")
    rng = np.random.default_rng(noise.seed if seed is None else seed)
    z = rng.uniform(*depth_range, n)
    fb = rig.focal_length * rig.baseline
    disparity = fb / z
    sigma = noise.sigma_at(z) * np.ones(n)
    if np.any(sigma > 0):
        disparity = disparity + _disparity_noise(rng, sigma)
    target = z + (rng.normal(0.0, depth_sigma, n) if depth_sigma > 0 else 0.0)
    bad = (disparity <= 0) | (target <= 0)
    while np.any(bad):
        idx = np.flatnonzero(bad)
        if np.any(sigma > 0):
            disparity[idx] = fb / z[idx] + _disparity_noise(rng, sigma[idx])
        if depth_sigma > 0:
            target[idx] = z[idx] + rng.normal(0.0, depth_sigma, len(idx))
        bad = (disparity <= 0) | (target <= 0)
    return [DepthSample(float(d), float(t)) for d, t in zip(disparity, target)]


def generate_size_dataset(rig: CameraRig, n: int, depth_range=(50.0, 500.0),
                          extent_range=(5.0, 40.0), noise: NoiseSpec = NOISE_FREE,
                          seed: int | None = None) -> list[SizeSample]:
    """(depth, pixel extent, real extent) samples for one box axis.

    Depth and real extent are drawn uniformly; the pixel extent is the exact
    projection plus the difference of two perturbed box edges.
    """
    _check_range("depth_range", depth_range)
    _check_range("extent_range", extent_range)
    if n < 0:
        raise StereoError("n must be non-negative")
    rng = np.random.default_rng(noise.seed if seed is None else seed)
    z = rng.uniform(*depth_range, n)
    real = rng.uniform(*extent_range, n)
    px = rig.focal_length * real / z
    sigma = noise.sigma_at(z) * np.ones(n)

    def perturb(idx):
        e = rng.normal(0.0, 1.0, (len(idx), 2)) * sigma[idx, None]
        return rig.focal_length * real[idx] / z[idx] + (e[:, 1] - e[:, 0])

    if np.any(sigma > 0):
        px = perturb(np.arange(n))
        while np.any(px <= 0):
            idx = np.flatnonzero(px <= 0)
            px[idx] = perturb(idx)
    return [SizeSample(float(a), float(b), float(c)) for a, b, c in zip(z, px, real)]


# -- ground-truth sidecar -------------------------------------------------------


def format_scene(objects: Sequence[SceneObject], frame_id: int = 0) -> str:
    lines = [f"SCENE {frame_id} {len(objects)}"]
    lines += [f"OBJ {o.class_id} {float(o.world_x)!r} {float(o.depth)!r} "
              f"{float(o.real_width)!r} {float(o.real_height)!r}" for o in objects]
    return "\n".join(lines) + "\n"


def parse_scenes(text: str) -> dict[int, list[SceneObject]]:
    """Parse SCENE/OBJ blocks into {frame_id: objects}."""
    scenes: dict[int, list[SceneObject]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if not tok or tok[0].startswith("#"):
            continue
        try:
            if tok[0] == "SCENE":
                current = scenes.setdefault(int(tok[1]), [])
            elif tok[0] == "OBJ" and current is not None and len(tok) == 6:
                current.append(SceneObject(int(tok[1]), *(float(v) for v in tok[2:])))
            else:
                raise ParseError(f"unexpected record {raw.strip()!r}", lineno)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    return scenes
