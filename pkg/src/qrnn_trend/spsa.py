"""Gradient-free SPSA training of the recurrent circuit."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .network import QrnnConfig, forward

LOG_FLOOR = math.exp(-10.0)
THETA_MAX = math.pi


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpsaConfig:
    a: float = 0.2
    c: float = 0.1
    big_a: float = 10.0
    alpha: float = 0.602
    gamma: float = 0.101
    max_iterations: int = 200
    convergence_tol: float = 0.0
    convergence_window: int = 25
    rng_seed: int = 0
    theta_max: float = THETA_MAX

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError("gain constants a and c must be positive")
        if not (0 < self.alpha <= 1) or not (0 < self.gamma <= 1):
            raise ValueError("alpha and gamma must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class TrainReport:
    best_theta: np.ndarray
    best_loss: float
    loss_history: list
    execution_count: int
    elapsed_seconds: float
    iterations: int = 0
    execution_unit: str = "objective evaluations"


def nll_loss(rows, theta, config: QrnnConfig, literal: bool = False) -> float:
    """Mean negative log-likelihood of the true labels, floored at exp(-10).

    With `literal=True` returns the raw mean of log(p + exp(-10)) over the
    predicted |1> probabilities instead (no label conditioning, no sign flip).
    """
    if len(rows) == 0:
        raise ValueError("loss needs a nonempty dataset")
    total = 0.0
    for window, label in rows:
        p = forward(window, theta, config).probability_one
        if literal:
            total += math.log(p + LOG_FLOOR)
        else:
            p_true = p if label == 1 else 1.0 - p
            total -= math.log(p_true + LOG_FLOOR)
    return total / len(rows)


def spsa_minimize(objective, theta0, config: SpsaConfig) -> TrainReport:
    """Standard two-sided SPSA with Bernoulli perturbations and best-seen tracking.

    Stops at max_iterations, or earlier once the best loss has improved by
    less than convergence_tol over the trailing convergence_window
    iterations (lookback capped by the iterations done so far).
    """
    start = time.perf_counter()
    rng = np.random.default_rng(config.rng_seed)
    theta = np.clip(np.asarray(theta0, dtype=float), 0.0, config.theta_max)
    f0 = float(objective(theta))
    if not math.isfinite(f0):
        raise OptimizationError(f"objective is not finite at the start point: {f0}")
    best_loss, best_theta = f0, theta.copy()
    best_track = [f0]
    loss_history = []
    evals = 0
    iterations = 0
    for k in range(config.max_iterations):
        ak = config.a / (k + 1 + config.big_a) ** config.alpha
        ck = config.c / (k + 1) ** config.gamma
        delta = rng.choice(np.array([-1.0, 1.0]), size=theta.size)
        theta_plus = np.clip(theta + ck * delta, 0.0, config.theta_max)
        theta_minus = np.clip(theta - ck * delta, 0.0, config.theta_max)
        f_plus = float(objective(theta_plus))
        f_minus = float(objective(theta_minus))
        evals += 2
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise OptimizationError(
                f"objective returned a non-finite value at iteration {k}: "
                f"f(+)={f_plus}, f(-)={f_minus}"
            )
        grad = (f_plus - f_minus) / (2.0 * ck) * delta
        theta = np.clip(theta - ak * grad, 0.0, config.theta_max)
        iterations = k + 1
        loss_history.append(0.5 * (f_plus + f_minus))
        for cand_loss, cand in ((f_plus, theta_plus), (f_minus, theta_minus)):
            if cand_loss < best_loss:
                best_loss, best_theta = cand_loss, cand.copy()
        best_track.append(best_loss)
        lookback = min(config.convergence_window, iterations)
        if best_track[-1 - lookback] - best_track[-1] < config.convergence_tol:
            break
    return TrainReport(
        best_theta=best_theta,
        best_loss=best_loss,
        loss_history=loss_history,
        execution_count=evals,
        elapsed_seconds=time.perf_counter() - start,
        iterations=iterations,
    )


def train_classical(rows, qrnn_config: QrnnConfig, spsa_config: SpsaConfig,
                    theta0=None, literal_loss: bool = False) -> TrainReport:
    """Minimize the dataset loss over the shared ring angles.

    execution_count is reported in circuit evaluations: two perturbed
    objective evaluations per iteration, each touching every record.
    """
    if len(rows) == 0:
        raise ValueError("training needs a nonempty dataset")
    if theta0 is None:
        theta0 = np.full(qrnn_config.layout.total, 0.5)

    def objective(theta):
        return nll_loss(rows, theta, qrnn_config, literal=literal_loss)

    report = spsa_minimize(objective, theta0, spsa_config)
    report.execution_count = report.iterations * 2 * len(rows)
    report.execution_unit = "circuit evaluations"
    return report
