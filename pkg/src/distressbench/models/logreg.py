"""L2-regularized logistic regression fitted by damped Newton iterations."""

from __future__ import annotations

from typing import Any

import numpy as np

from ..errors import ConfigError
from .base import check_predict_data, check_training_data, sigmoid


class LogisticRegression:
    """Minimizes ``c * sum(logloss) + 0.5 * ||w||^2`` (intercept unpenalized).

    Stops when the gradient's max-norm is at most ``tol`` or after
    ``max_iter`` Newton steps.
    """

    family = "logreg"

    def __init__(self, c: float = 1.0, tol: float = 1e-6, max_iter: int = 1000):
        if not c > 0:
            raise ConfigError(f"regularization strength c must be > 0, got {c}")
        self.c = c
        self.tol = tol
        self.max_iter = max_iter
        self.coef_: np.ndarray | None = None
        self.intercept_: float = 0.0
        self.n_iter_: int = 0
        self.converged_: bool = False

    def get_params(self) -> dict[str, Any]:
        return {"c": self.c, "tol": self.tol, "max_iter": self.max_iter}

    def _objective(self, Xb: np.ndarray, y: np.ndarray, theta: np.ndarray) -> float:
        z = Xb @ theta
        return float(self.c * np.sum(np.logaddexp(0.0, z) - y * z) + 0.5 * theta[:-1] @ theta[:-1])

    def fit(self, X, y) -> LogisticRegression:
        X, y = check_training_data(X, y)
        n, d = X.shape
        Xb = np.hstack([X, np.ones((n, 1))])
        theta = np.zeros(d + 1)
        penalty = np.ones(d + 1)
        penalty[-1] = 0.0
        obj = self._objective(Xb, y, theta)
        self.converged_ = False
        for it in range(1, self.max_iter + 1):
            p = sigmoid(Xb @ theta)
            grad = self.c * (Xb.T @ (p - y)) + penalty * theta
            if np.max(np.abs(grad)) <= self.tol:
                self.converged_ = True
                self.n_iter_ = it - 1
                break
            w = self.c * p * (1.0 - p)
            hess = (Xb * w[:, None]).T @ Xb + np.diag(penalty)
            hess[np.diag_indices_from(hess)] += 1e-12
            step = np.linalg.solve(hess, grad)
            t = 1.0
            decrement = grad @ step
            while True:
                cand = theta - t * step
                cand_obj = self._objective(Xb, y, cand)
                if cand_obj <= obj - 1e-4 * t * decrement or t < 1e-10:
                    break
                t *= 0.5
            theta, obj = cand, cand_obj
            self.n_iter_ = it
        else:
            p = sigmoid(Xb @ theta)
            grad = self.c * (Xb.T @ (p - y)) + penalty * theta
            self.converged_ = bool(np.max(np.abs(grad)) <= self.tol)
        self.coef_ = theta[:-1].copy()
        self.intercept_ = float(theta[-1])
        return self

    def decision_function(self, X) -> np.ndarray:
        if self.coef_ is None:
            raise RuntimeError("model is not fitted")
        X = check_predict_data(X, self.coef_.size)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def state_dict(self) -> dict:
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_, "n_iter": self.n_iter_}

    def load_state(self, state: dict) -> LogisticRegression:
        self.coef_ = np.array(state["coef"], dtype=float)
        self.intercept_ = float(state["intercept"])
        self.n_iter_ = int(state.get("n_iter", 0))
        return self


def fit_logreg(X, y, c: float = 1.0) -> LogisticRegression:
    return LogisticRegression(c=c).fit(X, y)
