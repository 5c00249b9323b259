"""Standardized polynomial least squares with optional ridge penalty."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from ..errors import InsufficientData, SingularSystem, StereoError

DEFAULT_RIDGE = 1e-6


@lru_cache(maxsize=None)
def monomial_exponents(arity: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples in graded-lex order, constant term first.

    For two variables of degree 2: 1, x, y, x^2, xy, y^2.
    """
    if arity not in (1, 2):
        raise StereoError(f"arity must be 1 or 2, got {arity}")
    if degree < 0:
        raise StereoError(f"degree must be >= 0, got {degree}")
    if arity == 1:
        return tuple((a,) for a in range(degree + 1))
    return tuple((a, total - a) for total in range(degree + 1) for a in range(total, -1, -1))


def n_coefficients(arity: int, degree: int) -> int:
    return len(monomial_exponents(arity, degree))


def expand_features(inputs: Sequence[float], degree: int) -> list[float]:
    """Monomial vector of one input point, e.g. ``([2, 3], 2) -> [1, 2, 3, 4, 6, 9]``."""
    exps = monomial_exponents(len(inputs), degree)
    return [math.prod(x ** e for x, e in zip(inputs, row)) for row in exps]


def design_matrix(z: np.ndarray, degree: int) -> np.ndarray:
    """Row-wise :func:`expand_features` for an (n, arity) array."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    exps = np.array(monomial_exponents(z.shape[1], degree))
    out = np.ones((z.shape[0], len(exps)))
    for col, row in enumerate(exps):
        for var, power in enumerate(row):
            if power:
                out[:, col] *= z[:, var] ** power
    return out


@dataclass(frozen=True)
class PolynomialModel:
    """A fitted polynomial over standardized inputs ``(x - shift) / scale``.

    Coefficients follow :func:`monomial_exponents` order. ``training_range``
    holds the per-feature (min, max) seen during fitting.
    """

    degree: int
    feature_arity: int
    coefficients: tuple[float, ...]
    input_shift: tuple[float, ...]
    input_scale: tuple[float, ...]
    ridge_lambda: float = 0.0
    training_range: tuple[tuple[float, float], ...] = ()
    cv_mae: float = math.nan
    cv_mse: float = math.nan
    units: str = "cm"

    def __post_init__(self):
        for name in ("coefficients", "input_shift", "input_scale"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(
            self, "training_range",
            tuple((float(lo), float(hi)) for lo, hi in self.training_range),
        )
        if len(self.coefficients) != n_coefficients(self.feature_arity, self.degree):
            raise StereoError(
                f"{len(self.coefficients)} coefficients for degree {self.degree}, "
                f"arity {self.feature_arity}"
            )
        if len(self.input_shift) != self.feature_arity or len(self.input_scale) != self.feature_arity:
            raise StereoError("normalization needs one shift/scale per feature")
        if any(not s > 0 for s in self.input_scale):
            raise StereoError("input_scale must be positive")
        if self.ridge_lambda < 0:
            raise StereoError("ridge_lambda must be non-negative")

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1 and self.feature_arity > 1:
            x = x[None, :]
        x = x.reshape(-1, self.feature_arity)
        z = (x - np.array(self.input_shift)) / np.array(self.input_scale)
        return design_matrix(z, self.degree) @ np.array(self.coefficients)

    def in_range(self, x) -> np.ndarray:
        """Per-row True when every feature lies inside the training range."""
        x = np.asarray(x, dtype=float).reshape(-1, self.feature_arity)
        lo = np.array([r[0] for r in self.training_range])
        hi = np.array([r[1] for r in self.training_range])
        return np.all((x >= lo) & (x <= hi), axis=1)

    def with_cv(self, cv_mae: float, cv_mse: float) -> "PolynomialModel":
        return replace(self, cv_mae=float(cv_mae), cv_mse=float(cv_mse))


def _standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    shift = x.mean(axis=0)
    scale = x.std(axis=0)
    # constant features collapse to z = 0 instead of dividing by ~0
    tiny = np.finfo(float).eps * np.maximum(1.0, np.abs(shift)) * 16
    scale = np.where(scale > tiny, scale, 1.0)
    return shift, scale


def fit_polynomial(x, y, degree: int = 5, ridge_lambda: float = DEFAULT_RIDGE,
                   units: str = "cm") -> PolynomialModel:
    """Least-squares polynomial fit of ``y`` on ``x``.

    ``x`` is (n,) or (n, arity). Minimizes ``||A c - y||^2 + lambda ||c[1:]||^2``
    where ``A`` is the monomial design on standardized inputs. Solved with an
    SVD-based least-squares routine on the (ridge-augmented) design matrix.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float).ravel()
    arity = x.shape[1]
    n_coef = n_coefficients(arity, degree)
    if x.shape[0] != y.shape[0]:
        raise StereoError(f"{x.shape[0]} inputs vs {y.shape[0]} targets")
    if x.shape[0] < n_coef:
        raise InsufficientData(f"{x.shape[0]} samples for {n_coef} coefficients")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise StereoError("non-finite training data")
    if ridge_lambda < 0:
        raise StereoError("ridge_lambda must be non-negative")

    shift, scale = _standardize(x)
    a = design_matrix((x - shift) / scale, degree)
    b = y
    if ridge_lambda == 0:
        if np.linalg.matrix_rank(a) < n_coef:
            raise SingularSystem(
                f"design matrix rank {np.linalg.matrix_rank(a)} < {n_coef}; "
                "inputs are degenerate or duplicated"
            )
    else:
        penalty = math.sqrt(ridge_lambda) * np.eye(n_coef)[1:]
        a = np.vstack([a, penalty])
        b = np.concatenate([y, np.zeros(n_coef - 1)])
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)

    return PolynomialModel(
        degree=degree,
        feature_arity=arity,
        coefficients=tuple(coef),
        input_shift=tuple(shift),
        input_scale=tuple(scale),
        ridge_lambda=float(ridge_lambda),
        training_range=tuple(zip(x.min(axis=0), x.max(axis=0))),
        units=units,
    )
