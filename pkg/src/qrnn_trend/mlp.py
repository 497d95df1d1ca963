"""Small feed-forward baseline: one sigmoid hidden layer trained by
full-batch gradient descent on binary cross-entropy. With hidden_units=0
it degenerates to plain logistic regression."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

EPS = 1e-12


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int = 8
    learning_rate: float = 0.5
    epochs: int = 500
    rng_seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 0:
            raise ValueError("hidden_units must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class MlpModel:
    w1: np.ndarray | None  # (features, hidden); None in logistic mode
    b1: np.ndarray | None
    w2: np.ndarray  # (hidden or features, 1)
    b2: np.ndarray  # (1,)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _forward(model: MlpModel, x):
    if model.w1 is None:
        return None, _sigmoid(x @ model.w2 + model.b2)
    h = _sigmoid(x @ model.w1 + model.b1)
    return h, _sigmoid(h @ model.w2 + model.b2)


def init_model(n_features: int, config: MlpConfig) -> MlpModel:
    rng = np.random.default_rng(config.rng_seed)
    if config.hidden_units == 0:
        return MlpModel(w1=None, b1=None,
                        w2=rng.normal(0, 0.5, size=(n_features, 1)), b2=np.zeros(1))
    return MlpModel(
        w1=rng.normal(0, 0.5, size=(n_features, config.hidden_units)),
        b1=np.zeros(config.hidden_units),
        w2=rng.normal(0, 0.5, size=(config.hidden_units, 1)),
        b2=np.zeros(1),
    )


def loss_and_grads(model: MlpModel, x, y):
    """Mean binary cross-entropy and its gradients for a batch."""
    n = x.shape[0]
    h, out = _forward(model, x)
    p = out[:, 0]
    loss = float(-np.mean(y * np.log(p + EPS) + (1 - y) * np.log(1 - p + EPS)))
    dz2 = (p - y)[:, None] / n
    if model.w1 is None:
        return loss, {"w2": x.T @ dz2, "b2": dz2.sum(axis=0)}
    grads = {
        "w2": h.T @ dz2,
        "b2": dz2.sum(axis=0),
    }
    dh = dz2 @ model.w2.T
    dz1 = dh * h * (1 - h)
    grads["w1"] = x.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return loss, grads


def train_mlp(rows, config: MlpConfig):
    """Train on trend rows; returns (model, report dict).

    The report's execution count is epochs x records.
    """
    if len(rows) == 0:
        raise ValueError("training needs a nonempty dataset")
    start = time.perf_counter()
    x = np.array([row.window for row in rows], dtype=float)
    y = np.array([row.label for row in rows], dtype=float)
    model = init_model(x.shape[1], config)
    history = []
    for _ in range(config.epochs):
        loss, grads = loss_and_grads(model, x, y)
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"loss became non-finite: {loss}")
        history.append(loss)
        if model.w1 is not None:
            model.w1 -= config.learning_rate * grads["w1"]
            model.b1 -= config.learning_rate * grads["b1"]
        model.w2 -= config.learning_rate * grads["w2"]
        model.b2 -= config.learning_rate * grads["b2"]
    report = {
        "loss_history": history,
        "execution_count": config.epochs * len(rows),
        "execution_unit": "epochs x records",
        "elapsed_seconds": time.perf_counter() - start,
    }
    return model, report


def predict_mlp(model: MlpModel, rows):
    """Thresholded labels (p >= 0.5 -> 1) for a list of trend rows."""
    if len(rows) == 0:
        return []
    x = np.array([row.window for row in rows], dtype=float)
    _, out = _forward(model, x)
    return [int(p >= 0.5) for p in out[:, 0]]
