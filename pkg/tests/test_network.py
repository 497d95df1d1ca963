"""Recurrent forward pass checked against a dense density-matrix oracle."""
import numpy as np
import pytest

from qrnn_trend.network import QrnnConfig, forward, predict_batch
from qrnn_trend.simulator import RegisterLayout

from oracles import dense_qrnn_forward

LAYOUT = RegisterLayout(n_d=2, n_h=2)
CONFIG = QrnnConfig(layout=LAYOUT, history_depth=3)
THETA = np.array([0.625, 0.375, 0.625, 0.375])


class TestConfig:
    def test_rejects_zero_depth(self):
        with pytest.raises(ValueError):
            QrnnConfig(layout=LAYOUT, history_depth=0)

    def test_rejects_degenerate_threshold(self):
        with pytest.raises(ValueError):
            QrnnConfig(layout=LAYOUT, threshold=0.0)
        with pytest.raises(ValueError):
            QrnnConfig(layout=LAYOUT, threshold=1.0)


class TestForward:
    def test_all_ones_window_predicts_zero(self):
        pred = forward((1.0, 1.0, 1.0), THETA, CONFIG)
        assert pred.probability_one == 0.0
        assert pred.label == 0

    def test_last_value_determines_probability(self):
        # pure-Rzz blocks cannot move populations, so p = (1 - x_last) / 2
        rng = np.random.default_rng(5)
        for _ in range(8):
            window = rng.uniform(0, 1, size=3)
            theta = rng.uniform(0, np.pi, size=4)
            pred = forward(window, theta, CONFIG)
            assert np.isclose(pred.probability_one, (1 - window[-1]) / 2, atol=1e-10)

    def test_matches_dense_matrix_chain_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            window = rng.uniform(0, 1, size=3)
            theta = rng.uniform(0, np.pi, size=4)
            got = forward(window, theta, CONFIG).probability_one
            want = dense_qrnn_forward(window, theta, 2, 2)
            assert np.isclose(got, want, atol=1e-10)

    def test_block_probabilities_one_per_step(self):
        pred = forward((0.3, 0.7, 0.2), THETA, CONFIG)
        assert len(pred.block_probabilities) == 3
        assert pred.probability_one == pred.block_probabilities[-1]
        for p in pred.block_probabilities:
            assert 0.0 <= p <= 1.0

    def test_deterministic(self):
        a = forward((0.3, 0.7, 0.2), THETA, CONFIG)
        b = forward((0.3, 0.7, 0.2), THETA, CONFIG)
        assert a.probability_one == b.probability_one
        assert a.block_probabilities == b.block_probabilities

    def test_threshold_controls_label(self):
        low = QrnnConfig(layout=LAYOUT, history_depth=3, threshold=0.25)
        pred = forward((0.3, 0.7, 0.4), THETA, low)  # p = 0.3
        assert pred.label == 1
        high = QrnnConfig(layout=LAYOUT, history_depth=3, threshold=0.35)
        assert forward((0.3, 0.7, 0.4), THETA, high).label == 0

    def test_single_qubit_layer_breaks_theta_invariance(self):
        cfg = QrnnConfig(layout=LAYOUT, history_depth=3, single_qubit_layer=True)
        p1 = forward((0.3, 0.7, 0.2), np.full(4, 0.2), cfg).probability_one
        p2 = forward((0.3, 0.7, 0.2), np.full(4, 1.2), cfg).probability_one
        assert abs(p1 - p2) > 1e-3
        assert 0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0

    def test_window_length_mismatch(self):
        with pytest.raises(ValueError):
            forward((0.3, 0.7), THETA, CONFIG)

    def test_window_out_of_range(self):
        with pytest.raises(ValueError):
            forward((0.3, 1.7, 0.2), THETA, CONFIG)


class TestPredictBatch:
    def test_empty(self):
        assert predict_batch([], THETA, CONFIG) == []

    def test_elementwise_agreement(self):
        windows = [(0.1, 0.5, 0.9), (0.8, 0.2, 0.4)]
        batch = predict_batch(windows, THETA, CONFIG)
        for w, pred in zip(windows, batch):
            single = forward(w, THETA, CONFIG)
            assert pred.probability_one == single.probability_one
            assert pred.label == single.label
