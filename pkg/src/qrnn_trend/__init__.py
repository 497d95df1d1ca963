"""Quantum recurrent trend prediction with classical (SPSA) and
discretized-QUBO ("adiabatic") training routes."""

from .simulator import (
    DiagonalOperator,
    QuantumState,
    RegisterLayout,
    SimulationError,
    ansatz_diagonal,
    apply_diagonal,
    encode_input,
    measure_first_data_qubit,
    reset_data_register,
)
from .network import QrnnConfig, TrendPrediction, forward, predict_batch
from .spsa import SpsaConfig, TrainReport, nll_loss, spsa_minimize, train_classical
from .adiabatic import (
    AnnealSchedule,
    BinaryPolynomial,
    Discretization,
    QuboModel,
    SolveResult,
    add_one_hot_penalties,
    build_objective,
    decode,
    discretize,
    quadratize,
    record_targets,
    solve_anneal,
    solve_exhaustive,
)
from .dataset import (
    DataError,
    PriceSeries,
    SplitDataset,
    TrendRow,
    load_prices,
    make_rows,
    prepare_dataset,
    split_80_20,
)
from .mlp import MlpConfig, predict_mlp, train_mlp
from .report import evaluate_accuracy, run_comparison, sweep_parts

__version__ = "0.1.0"
