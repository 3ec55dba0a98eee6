"""Prediction-quality metrics and the scaled-error transform.

Scaled errors put datasets with different collection intervals on a common
per-30-second basis: an error at interval ``T`` minutes is multiplied by
``NATIVE_INTERVAL_MIN / T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NATIVE_INTERVAL_MIN = 0.5

CSV_HEADER = "model,interval_min,n,r2,mae,rmse,scaled_mae,scaled_rmse"


class MetricsError(ValueError):
    pass


def _pair(y, yhat, min_len: int):
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape or y.ndim != 1:
        raise MetricsError(f"shape mismatch: {y.shape} vs {yhat.shape}")
    if len(y) < min_len:
        raise MetricsError(f"need at least {min_len} values, got {len(y)}")
    return y, yhat


def r_squared(y, yhat) -> float:
    """Proportion of target variance explained: 1 - SS_res / SS_tot.

    A constant target makes the ratio undefined and raises rather than
    silently returning a convention value.
    """
    y, yhat = _pair(y, yhat, 2)
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        raise MetricsError("target is constant: R^2 undefined")
    return 1.0 - ss_res / ss_tot


def mae(y, yhat) -> float:
    """Mean absolute error."""
    y, yhat = _pair(y, yhat, 1)
    return float(np.mean(np.abs(y - yhat)))


def rmse(y, yhat) -> float:
    """Root mean squared error."""
    y, yhat = _pair(y, yhat, 1)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def scale_error(err: float, interval_min: float) -> float:
    """Scale an error from interval ``interval_min`` to the 0.5 min base."""
    if interval_min <= 0:
        raise MetricsError(f"interval must be positive, got {interval_min}")
    return err * NATIVE_INTERVAL_MIN / interval_min


@dataclass(frozen=True, slots=True)
class MetricsReport:
    """Evaluation numbers for one (model, interval) cell."""

    interval_min: float
    n: int
    r2: float
    mae: float
    rmse: float
    scaled_mae: float
    scaled_rmse: float

    @classmethod
    def from_predictions(cls, y, yhat, interval_min: float) -> "MetricsReport":
        m, r = mae(y, yhat), rmse(y, yhat)
        return cls(
            interval_min=float(interval_min),
            n=len(np.asarray(y)),
            r2=r_squared(y, yhat),
            mae=m,
            rmse=r,
            scaled_mae=scale_error(m, interval_min),
            scaled_rmse=scale_error(r, interval_min),
        )

    def csv_row(self, model: str) -> str:
        return (f"{model},{self.interval_min!r},{self.n},{self.r2!r},"
                f"{self.mae!r},{self.rmse!r},{self.scaled_mae!r},{self.scaled_rmse!r}")
