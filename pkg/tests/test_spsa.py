"""Loss definition and SPSA optimizer behavior."""
import math

import numpy as np
import pytest

from qrnn_trend.network import QrnnConfig
from qrnn_trend.simulator import RegisterLayout
from qrnn_trend.spsa import (
    LOG_FLOOR,
    OptimizationError,
    SpsaConfig,
    nll_loss,
    spsa_minimize,
    train_classical,
)

LAYOUT = RegisterLayout(n_d=2, n_h=2)
CONFIG = QrnnConfig(layout=LAYOUT, history_depth=3)
THETA = np.full(4, 0.5)


class TestLoss:
    def test_perfectly_confident_correct_prediction(self):
        # window of ones gives p(1) = 0, so a label-0 record is certain
        rows = [((1.0, 1.0, 1.0), 0)]
        assert np.isclose(nll_loss(rows, THETA, CONFIG), -math.log(1.0 + LOG_FLOOR))

    def test_certainly_wrong_prediction_hits_the_floor(self):
        # p_true = 0 and the floor exp(-10) turns -log into exactly 10
        rows = [((1.0, 1.0, 1.0), 1)]
        assert np.isclose(nll_loss(rows, THETA, CONFIG), 10.0)

    def test_mean_over_records(self):
        rows = [((1.0, 1.0, 1.0), 0), ((1.0, 1.0, 1.0), 1)]
        want = (-math.log(1.0 + LOG_FLOOR) + 10.0) / 2
        assert np.isclose(nll_loss(rows, THETA, CONFIG), want)

    def test_hand_computed_intermediate_value(self):
        rows = [((0.2, 0.9, 0.4), 1)]  # p = (1 - 0.4) / 2 = 0.3
        assert np.isclose(nll_loss(rows, THETA, CONFIG), -math.log(0.3 + LOG_FLOOR))

    def test_literal_variant_averages_log_probability(self):
        rows = [((0.2, 0.9, 0.4), 1), ((0.5, 0.1, 0.8), 0)]
        want = (math.log(0.3 + LOG_FLOOR) + math.log(0.1 + LOG_FLOOR)) / 2
        assert np.isclose(nll_loss(rows, THETA, CONFIG, literal=True), want)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            nll_loss([], THETA, CONFIG)


def quadratic(theta):
    return float(np.sum(np.asarray(theta) ** 2))


class TestSpsaMinimize:
    def test_converges_on_the_analytic_quadratic(self):
        cfg = SpsaConfig(max_iterations=200, rng_seed=0)
        report = spsa_minimize(quadratic, np.full(4, 0.5), cfg)
        assert report.best_loss < 1e-2

    def test_converges_for_several_seeds(self):
        for seed in range(5):
            cfg = SpsaConfig(max_iterations=200, rng_seed=seed)
            report = spsa_minimize(quadratic, np.full(4, 0.5), cfg)
            assert report.best_loss < 1e-2

    def test_never_worse_than_the_start_point(self):
        cfg = SpsaConfig(max_iterations=50, rng_seed=3)
        theta0 = np.array([0.9, 0.1, 0.4, 0.7])
        report = spsa_minimize(quadratic, theta0, cfg)
        assert report.best_loss <= quadratic(theta0)

    def test_iterates_stay_inside_the_angle_box(self):
        seen = []

        def tracking(theta):
            seen.append(np.array(theta))
            return quadratic(theta)

        cfg = SpsaConfig(max_iterations=30, rng_seed=1)
        spsa_minimize(tracking, np.full(4, 3.0), cfg)
        for theta in seen:
            assert np.all(theta >= 0.0) and np.all(theta <= cfg.theta_max)

    def test_same_seed_same_trajectory(self):
        cfg = SpsaConfig(max_iterations=40, rng_seed=7)
        a = spsa_minimize(quadratic, np.full(4, 0.5), cfg)
        b = spsa_minimize(quadratic, np.full(4, 0.5), cfg)
        assert a.best_loss == b.best_loss
        assert np.array_equal(a.best_theta, b.best_theta)
        assert a.loss_history == b.loss_history

    def test_infinite_tolerance_stops_after_one_iteration(self):
        cfg = SpsaConfig(max_iterations=100, convergence_tol=math.inf, rng_seed=0)
        report = spsa_minimize(quadratic, np.full(4, 0.5), cfg)
        assert report.iterations == 1

    def test_zero_tolerance_never_stops_early(self):
        cfg = SpsaConfig(max_iterations=37, convergence_tol=0.0, rng_seed=0)
        report = spsa_minimize(quadratic, np.full(4, 0.5), cfg)
        assert report.iterations == 37

    def test_two_evaluations_per_iteration(self):
        calls = []

        def counting(theta):
            calls.append(1)
            return quadratic(theta)

        cfg = SpsaConfig(max_iterations=12, rng_seed=0)
        report = spsa_minimize(counting, np.full(4, 0.5), cfg)
        # one initial evaluation plus two per iteration
        assert len(calls) == 1 + 2 * report.iterations
        assert report.execution_count == 2 * report.iterations

    def test_non_finite_objective_raises(self):
        with pytest.raises(OptimizationError):
            spsa_minimize(lambda t: math.nan, np.full(4, 0.5), SpsaConfig())

    def test_bad_gains_rejected(self):
        with pytest.raises(ValueError):
            SpsaConfig(a=0.0)
        with pytest.raises(ValueError):
            SpsaConfig(alpha=1.5)


class TestTrainClassical:
    ROWS = [
        ((0.2, 0.9, 0.4), 1),
        ((0.5, 0.1, 0.8), 0),
        ((0.7, 0.6, 0.3), 1),
    ]

    def test_execution_count_audits_circuit_evaluations(self):
        cfg = SpsaConfig(max_iterations=5, rng_seed=0)
        report = train_classical(self.ROWS, CONFIG, cfg)
        assert report.iterations == 5
        assert report.execution_count == 5 * 2 * len(self.ROWS)
        assert report.execution_unit == "circuit evaluations"

    def test_reproducible(self):
        cfg = SpsaConfig(max_iterations=10, rng_seed=4)
        a = train_classical(self.ROWS, CONFIG, cfg)
        b = train_classical(self.ROWS, CONFIG, cfg)
        assert a.best_loss == b.best_loss
        assert np.array_equal(a.best_theta, b.best_theta)

    def test_best_loss_not_above_initial_loss(self):
        cfg = SpsaConfig(max_iterations=20, rng_seed=0)
        report = train_classical(self.ROWS, CONFIG, cfg)
        assert report.best_loss <= nll_loss(self.ROWS, np.full(4, 0.5), CONFIG) + 1e-12

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            train_classical([], CONFIG, SpsaConfig())
