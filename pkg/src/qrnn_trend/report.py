"""Scenario runner and comparison tables for the three training routes."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import adiabatic as adia
from . import mlp as mlpmod
from .network import QrnnConfig, predict_batch
from .spsa import SpsaConfig, train_classical


class ReportError(ValueError):
    pass


@dataclass
class ScenarioResult:
    scenario: str
    symbol: str
    records: int
    accuracy: float
    majority_accuracy: float
    ec: int
    ec_unit: str
    train_seconds: float
    solve_seconds: float
    extra: dict | None = None

    def as_row(self) -> dict:
        row = asdict(self)
        row.pop("extra")
        return row


def evaluate_accuracy(predictions, labels) -> float:
    if len(predictions) != len(labels):
        raise ReportError(
            f"prediction/label length mismatch: {len(predictions)} vs {len(labels)}"
        )
    if len(labels) == 0:
        raise ReportError("cannot evaluate accuracy on an empty set")
    hits = sum(1 for p, y in zip(predictions, labels) if int(p) == int(y))
    return hits / len(labels)


def majority_class_accuracy(train_rows, test_rows) -> float:
    """Accuracy of always predicting the training set's majority label."""
    ones = sum(r.label for r in train_rows)
    majority = 1 if ones * 2 >= len(train_rows) else 0
    return evaluate_accuracy([majority] * len(test_rows), [r.label for r in test_rows])


def qrnn_test_labels(test_rows, theta, qrnn_config: QrnnConfig):
    preds = predict_batch([r.feed_order() for r in test_rows], theta, qrnn_config)
    return [p.label for p in preds]


def run_classical_scenario(split, qrnn_config: QrnnConfig, spsa_config: SpsaConfig,
                           symbol: str = "") -> ScenarioResult:
    rows = [(r.feed_order(), r.label) for r in split.train]
    report = train_classical(rows, qrnn_config, spsa_config)
    labels = qrnn_test_labels(split.test, report.best_theta, qrnn_config)
    return ScenarioResult(
        scenario="qrnn_classical",
        symbol=symbol,
        records=len(split.train) + len(split.test),
        accuracy=evaluate_accuracy(labels, [r.label for r in split.test]),
        majority_accuracy=majority_class_accuracy(split.train, split.test),
        ec=report.execution_count,
        ec_unit="circuit evaluations",
        train_seconds=report.elapsed_seconds,
        solve_seconds=0.0,
        extra={"theta": [float(t) for t in report.best_theta],
               "loss": report.best_loss},
    )


def run_adiabatic_scenario(split, qrnn_config: QrnnConfig, parts: int = 4,
                           solver: str = "exhaustive",
                           schedule: adia.AnnealSchedule | None = None,
                           symbol: str = "", range_max: float = 1.0) -> ScenarioResult:
    layout = qrnn_config.layout
    disc = adia.discretize(parts, range_max=range_max)
    groups = adia.one_hot_groups(layout.total, parts)
    rows = [(r.window, r.label) for r in split.train]
    t0 = time.perf_counter()
    poly = adia.build_objective(rows, disc, layout, replicate=qrnn_config.duplicate_input)
    build_seconds = time.perf_counter() - t0
    if solver == "exhaustive":
        result = adia.solve_exhaustive(poly, disc, groups)
        ec_unit = "enumerated assignments"
    elif solver == "anneal":
        lam = adia.estimate_penalty_lambda(poly, disc, layout.total)
        penalized = adia.add_one_hot_penalties(poly, disc, layout.total, lam)
        qubo = adia.quadratize(penalized, groups=groups)
        result = adia.solve_anneal(qubo, schedule or adia.AnnealSchedule(), disc, groups)
        if not result.feasible:
            raise ReportError("annealer found no feasible sample; increase sweeps or reads")
        ec_unit = "flip attempts"
    else:
        raise ReportError(f"unknown solver {solver!r}")
    labels = qrnn_test_labels(split.test, result.decoded_theta, qrnn_config)
    return ScenarioResult(
        scenario="qrnn_adiabatic",
        symbol=symbol,
        records=len(split.train) + len(split.test),
        accuracy=evaluate_accuracy(labels, [r.label for r in split.test]),
        majority_accuracy=majority_class_accuracy(split.train, split.test),
        ec=result.explored_count,
        ec_unit=ec_unit,
        train_seconds=build_seconds,
        solve_seconds=result.elapsed_seconds,
        extra={"theta": [float(t) for t in result.decoded_theta],
               "energy": result.best_energy,
               "explored": result.explored_count,
               "feasible": result.feasible_count},
    )


def run_mlp_scenario(split, mlp_config: mlpmod.MlpConfig, symbol: str = "") -> ScenarioResult:
    model, report = mlpmod.train_mlp(split.train, mlp_config)
    labels = mlpmod.predict_mlp(model, split.test)
    return ScenarioResult(
        scenario="ann_baseline",
        symbol=symbol,
        records=len(split.train) + len(split.test),
        accuracy=evaluate_accuracy(labels, [r.label for r in split.test]),
        majority_accuracy=majority_class_accuracy(split.train, split.test),
        ec=report["execution_count"],
        ec_unit=report["execution_unit"],
        train_seconds=report["elapsed_seconds"],
        solve_seconds=0.0,
    )


def run_comparison(split, qrnn_config: QrnnConfig, spsa_config: SpsaConfig,
                   mlp_config: mlpmod.MlpConfig, parts: int = 4,
                   solver: str = "exhaustive",
                   schedule: adia.AnnealSchedule | None = None,
                   symbol: str = "") -> list:
    """All three scenarios on one prepared dataset."""
    return [
        run_classical_scenario(split, qrnn_config, spsa_config, symbol=symbol),
        run_adiabatic_scenario(split, qrnn_config, parts=parts, solver=solver,
                               schedule=schedule, symbol=symbol),
        run_mlp_scenario(split, mlp_config, symbol=symbol),
    ]


def sweep_parts(split, qrnn_config: QrnnConfig, parts_range=(3, 4, 5, 6)) -> list:
    """Explored/feasible/time table over discretization granularities."""
    layout = qrnn_config.layout
    rows = [(r.window, r.label) for r in split.train]
    out = []
    for parts in parts_range:
        disc = adia.discretize(parts)
        groups = adia.one_hot_groups(layout.total, parts)
        t0 = time.perf_counter()
        poly = adia.build_objective(rows, disc, layout,
                                    replicate=qrnn_config.duplicate_input)
        build_seconds = time.perf_counter() - t0
        result = adia.solve_exhaustive(poly, disc, groups)
        out.append({
            "parts": parts,
            "variables": layout.total * parts,
            "explored": result.explored_count,
            "feasible": result.feasible_count,
            "build_seconds": build_seconds,
            "solve_seconds": result.elapsed_seconds,
            "energy": result.best_energy,
            "theta": [float(t) for t in result.decoded_theta],
        })
    return out


def render_table(rows, columns) -> str:
    """Aligned-text table for a list of dicts."""
    cells = [[str(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c)
              for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)
