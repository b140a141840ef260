"""Ordinary least squares and ridge regression on standardized features."""

from __future__ import annotations

import numpy as np

from .base import DegenerateDesignMatrix

# Above this condition number the normal equations are unreliable and the
# solve falls back to the pseudo-inverse.
_COND_LIMIT = 1e12


class LinearModel:
    """OLS via normal equations with a pseudo-inverse fallback."""

    def __init__(self, coef: np.ndarray, intercept: float):
        self.coef_ = coef
        self.intercept_ = intercept

    @classmethod
    def train(cls, X: np.ndarray, y: np.ndarray) -> "LinearModel":
        if y.size == 0:
            raise DegenerateDesignMatrix("empty target vector")
        A = np.hstack([np.ones((X.shape[0], 1)), X])
        G = A.T @ A
        b = A.T @ y
        if np.linalg.cond(G) < _COND_LIMIT:
            beta = np.linalg.solve(G, b)
        else:
            beta = np.linalg.pinv(G) @ b
        return cls(coef=beta[1:], intercept=float(beta[0]))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef_ + self.intercept_

    def to_state(self) -> dict:
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_}

    @classmethod
    def from_state(cls, state: dict) -> "LinearModel":
        return cls(coef=np.asarray(state["coef"], dtype=float),
                   intercept=float(state["intercept"]))


class RidgeModel:
    """L2-penalized least squares; the intercept stays unpenalized."""

    def __init__(self, coef: np.ndarray, intercept: float, alpha: float):
        self.coef_ = coef
        self.intercept_ = intercept
        self.alpha = alpha

    @classmethod
    def train(cls, X: np.ndarray, y: np.ndarray, alpha: float) -> "RidgeModel":
        if y.size == 0:
            raise DegenerateDesignMatrix("empty target vector")
        # Solving on centered data leaves the intercept out of the penalty.
        x_mean = X.mean(axis=0)
        y_mean = float(y.mean())
        Xc = X - x_mean
        G = Xc.T @ Xc + alpha * np.eye(X.shape[1])
        coef = np.linalg.solve(G, Xc.T @ (y - y_mean))
        return cls(coef=coef, intercept=y_mean - float(coef @ x_mean), alpha=alpha)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef_ + self.intercept_

    def to_state(self) -> dict:
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_,
                "alpha": self.alpha}

    @classmethod
    def from_state(cls, state: dict) -> "RidgeModel":
        return cls(coef=np.asarray(state["coef"], dtype=float),
                   intercept=float(state["intercept"]),
                   alpha=float(state["alpha"]))
