"""Plain recurrent arrangement of quantum recurrent blocks.

Every block shares the same ring angles. A block encodes one input value
on the data register, applies the diagonal ansatz, records the
probability of the measured qubit reading |1>, and resets the data
register for the next value. The final block's probability is the trend
prediction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .simulator import (
    RegisterLayout,
    ansatz_diagonal,
    apply_diagonal,
    apply_single_qubit,
    encode_input,
    measure_first_data_qubit,
    reset_data_register,
    ry,
)


@dataclass(frozen=True)
class QrnnConfig:
    layout: RegisterLayout
    history_depth: int = 3
    duplicate_input: bool = True
    single_qubit_layer: bool = False
    threshold: float = 0.5

    def __post_init__(self):
        if self.history_depth < 1:
            raise ValueError("history_depth must be at least 1")
        if not (0.0 < self.threshold < 1.0):
            raise ValueError("threshold must lie in (0, 1)")


@dataclass(frozen=True)
class TrendPrediction:
    probability_one: float
    label: int
    block_probabilities: tuple = field(default=(), compare=False)


def forward(window, theta, config: QrnnConfig) -> TrendPrediction:
    """Run the recurrent circuit over `window` (values in feed order, oldest first)."""
    window = np.asarray(window, dtype=float)
    if window.shape != (config.history_depth,):
        raise ValueError(
            f"window length {window.shape} does not match history depth {config.history_depth}"
        )
    if np.any(window < 0.0) or np.any(window > 1.0):
        raise ValueError("window values must lie in [0, 1]")
    layout = config.layout
    diag = ansatz_diagonal(theta, layout, mode="unitary")
    state = encode_input(float(window[0]), layout, replicate=config.duplicate_input)
    block_probs = []
    for t in range(config.history_depth):
        state = apply_diagonal(state, diag)
        if config.single_qubit_layer:
            for q in range(layout.total):
                state = apply_single_qubit(state, ry(float(theta[q])), q)
        block_probs.append(measure_first_data_qubit(state, layout))
        if t + 1 < config.history_depth:
            state = reset_data_register(
                state, layout, float(window[t + 1]), replicate=config.duplicate_input
            )
    p = block_probs[-1]
    return TrendPrediction(
        probability_one=p,
        label=int(p >= config.threshold),
        block_probabilities=tuple(block_probs),
    )


def predict_batch(windows, theta, config: QrnnConfig):
    """Element-wise forward over an iterable of feed-order windows."""
    return [forward(w, theta, config) for w in windows]
