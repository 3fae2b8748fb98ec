"""Ridge regression on z-scored features with an unpenalized intercept."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, SingularSystem, SizeMismatch


@dataclass(frozen=True)
class RidgeModel:
    """Linear model ``y = intercept + ((x - mean) / scale) @ weights``."""

    weights: np.ndarray
    intercept: float
    alpha: float
    mean: np.ndarray
    scale: np.ndarray
    target: str = ""

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        return self.intercept + ((X - self.mean) / self.scale) @ self.weights

    @property
    def raw_coefficients(self) -> np.ndarray:
        """Weights expressed on the unstandardized features."""
        return self.weights / self.scale


def train_ridge(X, y, alpha: float = 1.0, target: str = "") -> RidgeModel:
    """Solve ``(Z'Z + alpha I) w = Z'(y - mean(y))`` on standardized ``Z``.

    Constant columns get scale 1 and weight 0.

    Raises:
        SingularSystem: ``alpha == 0`` and ``Z'Z`` is rank deficient.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y) or len(y) < 1:
        raise SizeMismatch("X must be 2-D with one row per target and at least one row")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    live = std > 0
    scale = np.where(live, std, 1.0)
    Z = ((X - mean) / scale)[:, live]
    intercept = float(y.mean())
    w = np.zeros(X.shape[1])
    if live.any():
        A = Z.T @ Z + alpha * np.eye(Z.shape[1])
        rhs = Z.T @ (y - intercept)
        if alpha == 0 and np.linalg.matrix_rank(A) < A.shape[0]:
            raise SingularSystem("normal equations are rank deficient with alpha = 0")
        w[live] = np.linalg.solve(A, rhs)
    return RidgeModel(w, intercept, float(alpha), mean, scale, target)
