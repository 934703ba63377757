"""Two-hidden-layer ReLU network with a logistic output, trained with Adam."""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from ..errors import ConfigError
from .base import check_predict_data, check_training_data, sigmoid


def init_params(sizes: Sequence[int], rng: np.random.Generator) -> list[np.ndarray]:
    """Glorot-uniform weights, zero biases: ``[W1, b1, W2, b2, W3, b3]``."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def forward(params: list[np.ndarray], X: np.ndarray) -> np.ndarray:
    """Output logits."""
    h = X
    n_layers = len(params) // 2
    for k in range(n_layers):
        h = h @ params[2 * k] + params[2 * k + 1]
        if k < n_layers - 1:
            h = np.maximum(h, 0.0)
    return h[:, 0]


def loss_and_grad(params: list[np.ndarray], X: np.ndarray, y: np.ndarray, l2_alpha: float):
    """Mean log-loss plus ``0.5 * alpha * sum(W**2) / batch`` and its gradient."""
    n = X.shape[0]
    n_layers = len(params) // 2
    acts = [X]
    pre = []
    h = X
    for k in range(n_layers):
        z = h @ params[2 * k] + params[2 * k + 1]
        pre.append(z)
        h = np.maximum(z, 0.0) if k < n_layers - 1 else z
        acts.append(h)
    logit = acts[-1][:, 0]
    loss = float(np.mean(np.logaddexp(0.0, logit) - y * logit))
    loss += 0.5 * l2_alpha * sum(float(np.sum(params[2 * k] ** 2)) for k in range(n_layers)) / n

    grads: list[np.ndarray] = [None] * len(params)  # type: ignore[list-item]
    delta = ((sigmoid(logit) - y) / n)[:, None]
    for k in range(n_layers - 1, -1, -1):
        grads[2 * k] = acts[k].T @ delta + l2_alpha * params[2 * k] / n
        grads[2 * k + 1] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ params[2 * k].T) * (pre[k - 1] > 0)
    return loss, grads


class MLPClassifier:
    family = "mlp"

    def __init__(
        self,
        hidden_sizes: Sequence[int] = (64, 64),
        l2_alpha: float = 1e-4,
        learning_rate_init: float = 1e-3,
        epochs: int = 200,
        batch_size: int = 256,
        seed: int = 42,
    ):
        hidden_sizes = tuple(int(h) for h in hidden_sizes)
        if len(hidden_sizes) != 2 or min(hidden_sizes) < 1:
            raise ConfigError(f"hidden_sizes must be two positive widths, got {hidden_sizes}")
        if learning_rate_init <= 0:
            raise ConfigError("learning_rate_init must be > 0")
        if epochs < 0 or batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        self.hidden_sizes = hidden_sizes
        self.l2_alpha = l2_alpha
        self.learning_rate_init = learning_rate_init
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.params_: list[np.ndarray] | None = None
        self.loss_curve_: list[float] = []

    def get_params(self) -> dict[str, Any]:
        return {
            "hidden_sizes": list(self.hidden_sizes),
            "l2_alpha": self.l2_alpha,
            "learning_rate_init": self.learning_rate_init,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }

    def fit(self, X, y) -> MLPClassifier:
        X, y = check_training_data(X, y)
        rng = np.random.default_rng(self.seed)
        params = init_params((X.shape[1], *self.hidden_sizes, 1), rng)
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        beta1, beta2, eps, lr = 0.9, 0.999, 1e-8, self.learning_rate_init
        step = 0
        n = X.shape[0]
        self.loss_curve_ = []
        for _ in range(self.epochs):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                loss, grads = loss_and_grad(params, X[idx], y[idx], self.l2_alpha)
                total += loss * idx.size
                step += 1
                corr1 = 1.0 - beta1**step
                corr2 = 1.0 - beta2**step
                for p, g, mk, vk in zip(params, grads, m, v):
                    mk *= beta1
                    mk += (1.0 - beta1) * g
                    vk *= beta2
                    vk += (1.0 - beta2) * g * g
                    p -= lr * (mk / corr1) / (np.sqrt(vk / corr2) + eps)
            self.loss_curve_.append(total / n)
        self.params_ = params
        return self

    def predict_proba(self, X) -> np.ndarray:
        if self.params_ is None:
            raise RuntimeError("model is not fitted")
        X = check_predict_data(X, self.params_[0].shape[0])
        return sigmoid(forward(self.params_, X))

    def state_dict(self) -> dict:
        return {"params": [p.tolist() for p in self.params_]}

    def load_state(self, state: dict) -> MLPClassifier:
        self.params_ = [np.array(p, dtype=float) for p in state["params"]]
        return self


def fit_mlp(X, y, params: dict | None = None) -> MLPClassifier:
    return MLPClassifier(**(params or {})).fit(X, y)
