"""Depth and size regressors, k-fold cross-validation and the pinhole baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import CameraRig
from ..errors import InsufficientData, InvalidEstimate, NonPositiveDisparity, StereoError
from .metrics import mae, mse, relative_mae
from .polynomial import DEFAULT_RIDGE, PolynomialModel, fit_polynomial, n_coefficients


@dataclass(frozen=True)
class DepthSample:
    disparity: float
    depth: float

    def __post_init__(self):
        if not (self.disparity > 0 and self.depth > 0):
            raise StereoError(f"depth sample must be positive: {self}")


@dataclass(frozen=True)
class SizeSample:
    depth: float
    pixel_extent: float
    real_extent: float

    def __post_init__(self):
        if not (self.depth > 0 and self.pixel_extent > 0 and self.real_extent > 0):
            raise StereoError(f"size sample must be positive: {self}")


@dataclass(frozen=True)
class CvReport:
    k: int
    per_fold_mae: tuple[float, ...]
    per_fold_mse: tuple[float, ...]
    per_fold_rel_mae: tuple[float, ...]

    @property
    def mean_mae(self) -> float:
        return float(np.mean(self.per_fold_mae))

    @property
    def mean_mse(self) -> float:
        return float(np.mean(self.per_fold_mse))

    @property
    def mean_rel_mae(self) -> float:
        return float(np.mean(self.per_fold_rel_mae))


def kfold_indices(x: np.ndarray, k: int, seed: int | None = None) -> list[np.ndarray]:
    """Split row indices of ``x`` into ``k`` held-out folds.

    Default: rows sorted lexicographically by their features (first column
    most significant) and dealt round-robin. With ``seed`` the rows are
    shuffled instead of sorted.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if k < 2:
        raise StereoError("k must be >= 2")
    if seed is None:
        order = np.lexsort(x.T[::-1])
    else:
        order = np.random.default_rng(seed).permutation(len(x))
    return [order[i::k] for i in range(k)]


def cross_validate(x, y, degree: int = 5, ridge_lambda: float = DEFAULT_RIDGE,
                   k: int = 5, seed: int | None = None) -> CvReport:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float)
    n = len(y)
    need = n_coefficients(x.shape[1], degree)
    if n < k:
        raise InsufficientData(f"{n} samples for {k} folds")
    folds = kfold_indices(x, k, seed)
    if n - max(len(f) for f in folds) < need:
        raise InsufficientData(
            f"training splits of {n - max(len(f) for f in folds)} samples "
            f"cannot fit {need} coefficients"
        )
    maes, mses, rels = [], [], []
    for held in folds:
        train = np.setdiff1d(np.arange(n), held)
        model = fit_polynomial(x[train], y[train], degree, ridge_lambda)
        pred = model.predict(x[held])
        maes.append(mae(pred, y[held]))
        mses.append(mse(pred, y[held]))
        rels.append(relative_mae(pred, y[held]))
    return CvReport(k, tuple(maes), tuple(mses), tuple(rels))


def _train(x, y, degree, ridge_lambda, k, units, seed):
    report = cross_validate(x, y, degree, ridge_lambda, k, seed)
    model = fit_polynomial(x, y, degree, ridge_lambda, units=units)
    return model.with_cv(report.mean_mae, report.mean_mse), report


def depth_arrays(samples: Sequence[DepthSample]) -> tuple[np.ndarray, np.ndarray]:
    return (np.array([s.disparity for s in samples], dtype=float),
            np.array([s.depth for s in samples], dtype=float))


def size_arrays(samples: Sequence[SizeSample]) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([(s.depth, s.pixel_extent) for s in samples], dtype=float).reshape(-1, 2)
    return x, np.array([s.real_extent for s in samples], dtype=float)


def train_depth_model(samples: Sequence[DepthSample], degree: int = 5,
                      ridge_lambda: float = DEFAULT_RIDGE, k: int = 5,
                      units: str = "cm", seed: int | None = None):
    """Fit disparity -> depth on all samples and score it by k-fold CV.

    Returns ``(model, report)``; the model carries the mean CV scores.
    """
    x, y = depth_arrays(samples)
    return _train(x, y, degree, ridge_lambda, k, units, seed)


def train_size_model(samples: Sequence[SizeSample], degree: int = 5,
                     ridge_lambda: float = DEFAULT_RIDGE, k: int = 5,
                     units: str = "cm", seed: int | None = None):
    """Fit (depth, pixel extent) -> real extent. Train one per axis."""
    x, y = size_arrays(samples)
    return _train(x, y, degree, ridge_lambda, k, units, seed)


def predict_depth(model: PolynomialModel, disparity: float) -> tuple[float, bool]:
    """Depth for one disparity, plus True when it lies outside the training range."""
    if model.feature_arity != 1:
        raise StereoError("depth model must have arity 1")
    if not disparity > 0:
        raise NonPositiveDisparity(f"disparity {disparity}")
    depth = float(model.predict([disparity])[0])
    return depth, not bool(model.in_range([disparity])[0])


def predict_size(model_w: PolynomialModel, model_h: PolynomialModel, depth: float,
                 box_width_px: float, box_height_px: float) -> tuple[float, float, bool]:
    if model_w.feature_arity != 2 or model_h.feature_arity != 2:
        raise StereoError("size models must have arity 2")
    if not (depth > 0 and box_width_px > 0 and box_height_px > 0):
        raise InvalidEstimate(
            f"size inputs must be positive: depth={depth}, "
            f"w={box_width_px}, h={box_height_px}"
        )
    fw = [depth, box_width_px]
    fh = [depth, box_height_px]
    width = float(model_w.predict(fw)[0])
    height = float(model_h.predict(fh)[0])
    inside = bool(model_w.in_range(fw)[0]) and bool(model_h.in_range(fh)[0])
    return width, height, not inside


def analytical_depth(disparity: float, rig: CameraRig) -> float:
    """Pinhole stereo depth ``f * b / d`` in the baseline's units."""
    if not disparity > 0:
        raise NonPositiveDisparity(f"disparity {disparity}")
    return rig.focal_length * rig.baseline / disparity
