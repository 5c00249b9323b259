"""Polynomial depth/size regression, metrics and model persistence."""

from .io import (
    format_depth_dataset,
    format_model,
    format_size_dataset,
    load_model,
    parse_depth_dataset,
    parse_model,
    parse_size_dataset,
    save_model,
)
from .metrics import BinComparison, binned_mae, mae, mse, relative_mae
from .polynomial import (
    DEFAULT_RIDGE,
    PolynomialModel,
    design_matrix,
    expand_features,
    fit_polynomial,
    monomial_exponents,
    n_coefficients,
)
from .training import (
    CvReport,
    DepthSample,
    SizeSample,
    analytical_depth,
    cross_validate,
    depth_arrays,
    kfold_indices,
    predict_depth,
    predict_size,
    size_arrays,
    train_depth_model,
    train_size_model,
)

__all__ = [
    "BinComparison", "CvReport", "DEFAULT_RIDGE", "DepthSample", "PolynomialModel",
    "SizeSample", "analytical_depth", "binned_mae", "cross_validate", "depth_arrays",
    "design_matrix", "expand_features", "fit_polynomial", "format_depth_dataset",
    "format_model", "format_size_dataset", "kfold_indices", "load_model", "mae",
    "monomial_exponents", "mse", "n_coefficients", "parse_depth_dataset", "parse_model",
    "parse_size_dataset", "predict_depth", "predict_size", "relative_mae", "save_model",
    "size_arrays", "train_depth_model", "train_size_model",
]
