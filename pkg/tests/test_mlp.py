"""Feed-forward baseline: training behavior and gradient correctness."""
import numpy as np
import pytest

from qrnn_trend.dataset import TrendRow
from qrnn_trend.mlp import (
    MlpConfig,
    MlpModel,
    TrainingDivergedError,
    init_model,
    loss_and_grads,
    predict_mlp,
    train_mlp,
)


def separable_rows(n=60, seed=0):
    """Label 1 iff the window mean is above 0.5: linearly separable."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        w = rng.uniform(0, 1, size=3)
        rows.append(TrendRow(window=tuple(w), label=int(w.mean() > 0.5)))
    return rows


XOR_ROWS = [
    TrendRow(window=(0.0, 0.0), label=0),
    TrendRow(window=(0.0, 1.0), label=1),
    TrendRow(window=(1.0, 0.0), label=1),
    TrendRow(window=(1.0, 1.0), label=0),
]


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            MlpConfig(hidden_units=-1)
        with pytest.raises(ValueError):
            MlpConfig(learning_rate=0.0)


class TestTraining:
    def test_learns_a_separable_problem(self):
        rows = separable_rows()
        model, report = train_mlp(rows, MlpConfig(epochs=500, rng_seed=0))
        preds = predict_mlp(model, rows)
        accuracy = np.mean([p == r.label for p, r in zip(preds, rows)])
        assert accuracy >= 0.95
        assert report["loss_history"][-1] < report["loss_history"][0]

    def test_learns_xor_with_a_hidden_layer(self):
        cfg = MlpConfig(hidden_units=4, learning_rate=1.0, epochs=5000, rng_seed=1)
        model, _ = train_mlp(XOR_ROWS, cfg)
        assert predict_mlp(model, XOR_ROWS) == [0, 1, 1, 0]

    def test_logistic_mode_loss_decreases(self):
        rows = separable_rows()
        cfg = MlpConfig(hidden_units=0, learning_rate=0.2, epochs=200, rng_seed=0)
        _, report = train_mlp(rows, cfg)
        hist = report["loss_history"]
        assert hist[-1] < hist[0]

    def test_zero_epochs(self):
        rows = separable_rows(n=10)
        model, report = train_mlp(rows, MlpConfig(epochs=0))
        assert report["execution_count"] == 0
        assert report["loss_history"] == []
        assert len(predict_mlp(model, rows)) == 10

    def test_execution_count_is_epochs_times_records(self):
        rows = separable_rows(n=17)
        _, report = train_mlp(rows, MlpConfig(epochs=23))
        assert report["execution_count"] == 23 * 17
        assert report["execution_unit"] == "epochs x records"

    def test_deterministic_for_a_fixed_seed(self):
        rows = separable_rows()
        cfg = MlpConfig(epochs=50, rng_seed=5)
        model_a, report_a = train_mlp(rows, cfg)
        model_b, report_b = train_mlp(rows, cfg)
        assert np.array_equal(model_a.w1, model_b.w1)
        assert np.array_equal(model_a.w2, model_b.w2)
        assert report_a["loss_history"] == report_b["loss_history"]

    def test_divergence_is_reported(self):
        rows = separable_rows(n=20)
        cfg = MlpConfig(epochs=10, learning_rate=float("inf"))
        with np.errstate(invalid="ignore"), pytest.raises(TrainingDivergedError):
            train_mlp(rows, cfg)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            train_mlp([], MlpConfig())


class TestGradients:
    def numeric_grad(self, model, x, y, array, eps=1e-6):
        grad = np.zeros_like(array)
        flat = array.reshape(-1)
        out = grad.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            up, _ = loss_and_grads(model, x, y)
            flat[i] = keep - eps
            down, _ = loss_and_grads(model, x, y)
            flat[i] = keep
            out[i] = (up - down) / (2 * eps)
        return grad

    def test_analytic_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(0, 1, size=(5, 3))
        y = rng.integers(0, 2, size=5).astype(float)
        model = init_model(3, MlpConfig(hidden_units=4, rng_seed=3))
        _, grads = loss_and_grads(model, x, y)
        for name, array in (("w1", model.w1), ("b1", model.b1),
                            ("w2", model.w2), ("b2", model.b2)):
            numeric = self.numeric_grad(model, x, y, array)
            scale = max(np.abs(numeric).max(), 1e-8)
            assert np.abs(grads[name] - numeric).max() / scale < 1e-5

    def test_logistic_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(0, 1, size=(6, 3))
        y = rng.integers(0, 2, size=6).astype(float)
        model = init_model(3, MlpConfig(hidden_units=0, rng_seed=5))
        _, grads = loss_and_grads(model, x, y)
        for name, array in (("w2", model.w2), ("b2", model.b2)):
            numeric = self.numeric_grad(model, x, y, array)
            scale = max(np.abs(numeric).max(), 1e-8)
            assert np.abs(grads[name] - numeric).max() / scale < 1e-5


class TestPrediction:
    def test_zero_weights_predict_one(self):
        # p = sigmoid(0) = 0.5 and the threshold is inclusive
        model = MlpModel(w1=np.zeros((3, 2)), b1=np.zeros(2),
                         w2=np.zeros((2, 1)), b2=np.zeros(1))
        rows = [TrendRow(window=(0.1, 0.2, 0.3), label=0)]
        assert predict_mlp(model, rows) == [1]

    def test_empty_input(self):
        model = init_model(3, MlpConfig())
        assert predict_mlp(model, []) == []
