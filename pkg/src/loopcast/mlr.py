"""Multiple linear regression via column-pivoted Householder least squares.

The intercept column participates in pivoting like any feature, so a rank
check on the triangular factor identifies exactly which columns are
linearly dependent. Normal equations are deliberately not used here (they
square the condition number); they exist only as an independent test
oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# A pivot below RANK_TOL x the largest pivot declares rank deficiency.
RANK_TOL = 1e-10


class SingularMatrixError(ValueError):
    def __init__(self, dependent: list[str]):
        self.dependent = list(dependent)
        super().__init__(
            "design matrix is rank deficient; dependent columns: "
            + ", ".join(self.dependent)
        )


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class MlrModel:
    """Fitted linear model: ``y = coefficients[0] + coefficients[1:] . x``."""

    coefficients: tuple[float, ...]
    feature_names: tuple[str, ...]
    training_rows: int | None = None

    @property
    def intercept(self) -> float:
        return self.coefficients[0]

    def predict(self, X) -> np.ndarray:
        """Predict for an (n, k) matrix of feature rows."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ValueError(
                f"expected (n, {len(self.feature_names)}) matrix, got {X.shape}"
            )
        beta = np.asarray(self.coefficients)
        return beta[0] + X @ beta[1:]

    def to_json_obj(self) -> dict:
        return {
            "type": "mlr",
            "features": list(self.feature_names),
            "coefficients": list(self.coefficients),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_obj(), indent=2) + "\n",
                              encoding="utf-8")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MlrModel":
        if obj.get("type") != "mlr":
            raise ValueError(f"not an mlr model: type={obj.get('type')!r}")
        return cls(
            coefficients=tuple(float(c) for c in obj["coefficients"]),
            feature_names=tuple(obj["features"]),
        )

    @classmethod
    def load(cls, path) -> "MlrModel":
        return cls.from_json_obj(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_mlr(X, y, feature_names=None) -> MlrModel:
    """Ordinary least squares fit with an intercept.

    Raises :class:`InsufficientDataError` when n < k + 1 and
    :class:`SingularMatrixError` (naming the dependent columns) when the
    pivoted triangular factor falls below the rank tolerance.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be a matrix, got shape {X.shape}")
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError(f"y must have shape ({n},), got {y.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("X and y must be finite")
    if feature_names is None:
        feature_names = tuple(f"x{j + 1}" for j in range(k))
    feature_names = tuple(feature_names)
    if len(feature_names) != k:
        raise ValueError(f"got {len(feature_names)} names for {k} features")
    if n < k + 1:
        raise InsufficientDataError(f"need at least {k + 1} rows to fit {k} features, got {n}")

    names = ("intercept",) + feature_names
    p = k + 1
    R = np.column_stack([np.ones(n), X])
    qty = y.copy()
    perm = np.arange(p)

    for j in range(min(n, p)):
        # pivot on the largest remaining column norm
        norms = np.sqrt(np.sum(R[j:, j:] ** 2, axis=0))
        pivot = j + int(np.argmax(norms))
        if pivot != j:
            R[:, [j, pivot]] = R[:, [pivot, j]]
            perm[[j, pivot]] = perm[[pivot, j]]
        x = R[j:, j]
        norm_x = np.sqrt(np.sum(x ** 2))
        if norm_x == 0.0:
            continue
        v = x.copy()
        v[0] += norm_x if x[0] >= 0 else -norm_x
        v /= np.sqrt(np.sum(v ** 2))
        R[j:, j:] -= 2.0 * np.outer(v, v @ R[j:, j:])
        qty[j:] -= 2.0 * v * (v @ qty[j:])

    diag = np.abs(np.diag(R[:p, :p]))
    if diag[0] == 0.0 or np.any(diag < RANK_TOL * diag[0]):
        bad = np.nonzero((diag < RANK_TOL * max(diag[0], np.finfo(float).tiny)) | (diag == 0.0))[0]
        raise SingularMatrixError([names[perm[j]] for j in bad])

    beta_p = np.zeros(p)
    for i in range(p - 1, -1, -1):
        beta_p[i] = (qty[i] - R[i, i + 1:p] @ beta_p[i + 1:]) / R[i, i]
    beta = np.empty(p)
    beta[perm] = beta_p
    return MlrModel(
        coefficients=tuple(float(b) for b in beta),
        feature_names=feature_names,
        training_rows=n,
    )


def predict_mlr(model: MlrModel, x) -> float:
    """Predict a single row: intercept plus the weighted feature sum."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (len(model.feature_names),):
        raise ValueError(
            f"expected {len(model.feature_names)} features, got shape {x.shape}"
        )
    return float(model.predict(x.reshape(1, -1))[0])
