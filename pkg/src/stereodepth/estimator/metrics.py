"""Regression error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput, LengthMismatch


def _residuals(predictions, truth) -> np.ndarray:
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if p.shape != t.shape:
        raise LengthMismatch(f"{p.size} predictions vs {t.size} truth values")
    if p.size == 0:
        raise EmptyInput("metrics need at least one sample")
    return p - t


def mae(predictions, truth) -> float:
    """Mean absolute error (with the absolute value, so errors cannot cancel)."""
    return float(np.mean(np.abs(_residuals(predictions, truth))))


def mse(predictions, truth) -> float:
    r = _residuals(predictions, truth)
    return float(np.mean(r * r))


def relative_mae(predictions, truth) -> float:
    """Mean of ``|p - y| / |y|``."""
    r = _residuals(predictions, truth)
    return float(np.mean(np.abs(r) / np.abs(np.asarray(truth, dtype=float).ravel())))


@dataclass(frozen=True)
class BinComparison:
    lo: float
    hi: float
    count: int
    regression_mae: float
    analytical_mae: float


def binned_mae(truth, regression, analytical, edges) -> list[BinComparison]:
    """MAE of two predictors per truth bin ``[edges[i], edges[i+1])``.

    The last bin is closed on the right. Empty bins are skipped.
    """
    t = np.asarray(truth, dtype=float)
    reg = np.asarray(regression, dtype=float)
    ana = np.asarray(analytical, dtype=float)
    out = []
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        last = i == len(edges) - 2
        mask = (t >= lo) & ((t <= hi) if last else (t < hi))
        if not mask.any():
            continue
        out.append(BinComparison(float(lo), float(hi), int(mask.sum()),
                                 mae(reg[mask], t[mask]), mae(ana[mask], t[mask])))
    return out
