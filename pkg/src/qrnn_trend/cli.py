"""Batch command-line front end: prepare, train, evaluate, compare, sweep-parts.

Configuration comes from an optional key=value file overridden by flags.
Every output file embeds the effective config hash and master seed; files
carrying scientific results contain no wall-clock timings, so reruns with
the same hash are byte-identical (timings go to a separate sidecar).

Exit codes: 0 success, 1 usage, 2 data error, 3 solver/optimizer failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import adiabatic as adia
from . import dataset as ds
from . import mlp as mlpmod
from . import report as rpt
from .network import QrnnConfig
from .simulator import RegisterLayout, SimulationError
from .spsa import OptimizationError, SpsaConfig, train_classical

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    data: str = ""
    symbol: str = ""
    record_limit: int = 0  # 0 = use the whole series
    history_depth: int = 3
    n_d: int = 2
    n_h: int = 2
    parts: int = 4
    range_max: float = 1.0
    solver: str = "exhaustive"
    threshold: float = 0.5
    seed: int = 0
    out: str = "out"
    spsa_a: float = 0.2
    spsa_c: float = 0.1
    spsa_big_a: float = 10.0
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    spsa_max_iterations: int = 200
    spsa_convergence_tol: float = 0.0
    spsa_convergence_window: int = 25
    mlp_hidden_units: int = 8
    mlp_learning_rate: float = 0.5
    mlp_epochs: int = 500
    anneal_sweeps: int = 8000
    anneal_reads: int = 16
    anneal_beta_start: float = 0.1
    anneal_beta_end: float = 10.0

    def config_hash(self) -> str:
        lines = sorted(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]

    def layout(self) -> RegisterLayout:
        return RegisterLayout(n_d=self.n_d, n_h=self.n_h)

    def qrnn(self) -> QrnnConfig:
        return QrnnConfig(layout=self.layout(), history_depth=self.history_depth,
                          threshold=self.threshold)

    def spsa(self) -> SpsaConfig:
        return SpsaConfig(a=self.spsa_a, c=self.spsa_c, big_a=self.spsa_big_a,
                          alpha=self.spsa_alpha, gamma=self.spsa_gamma,
                          max_iterations=self.spsa_max_iterations,
                          convergence_tol=self.spsa_convergence_tol,
                          convergence_window=self.spsa_convergence_window,
                          rng_seed=self.seed)

    def mlp(self) -> mlpmod.MlpConfig:
        return mlpmod.MlpConfig(hidden_units=self.mlp_hidden_units,
                                learning_rate=self.mlp_learning_rate,
                                epochs=self.mlp_epochs, rng_seed=self.seed)

    def schedule(self) -> adia.AnnealSchedule:
        return adia.AnnealSchedule(sweeps=self.anneal_sweeps, reads=self.anneal_reads,
                                   beta_start=self.anneal_beta_start,
                                   beta_end=self.anneal_beta_end, rng_seed=self.seed)


def load_config_file(path) -> dict:
    """key=value lines; blank lines and # comments ignored."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ds.DataError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def build_config(args) -> RunConfig:
    values = load_config_file(args.config) if args.config else {}
    cfg = RunConfig()
    field_types = {f.name: f.type for f in fields(RunConfig)}
    for key, raw in values.items():
        if key not in field_types:
            raise UsageError(f"unknown config key {key!r}")
        kind = field_types[key]
        current = getattr(cfg, key)
        try:
            setattr(cfg, key, type(current)(raw) if not isinstance(current, str) else raw)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {raw!r}") from exc
    for flag, key in (("data", "data"), ("symbol", "symbol"), ("seed", "seed"),
                      ("parts", "parts"), ("history_depth", "history_depth"),
                      ("solver", "solver"), ("out", "out"),
                      ("record_limit", "record_limit")):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, key, value)
    if cfg.solver not in ("exhaustive", "anneal"):
        raise UsageError(f"solver must be exhaustive or anneal, got {cfg.solver!r}")
    return cfg


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _provenance(cfg: RunConfig) -> dict:
    return {"config_hash": cfg.config_hash(), "seed": cfg.seed, "symbol": cfg.symbol}


def _load_split(cfg: RunConfig) -> ds.SplitDataset:
    out = Path(cfg.out)
    train_path, test_path = out / "train.csv", out / "test.csv"
    if not train_path.exists() or not test_path.exists():
        raise ds.DataError(f"prepared dataset not found under {out}; run `prepare` first")
    norm = json.loads((out / "normalization.json").read_text())
    return ds.SplitDataset(
        train=ds.read_rows_csv(train_path),
        test=ds.read_rows_csv(test_path),
        normalization=ds.NormalizationRecord(low=norm["low"], high=norm["high"],
                                             clamped=norm["clamped"]),
    )


def cmd_prepare(cfg: RunConfig) -> int:
    if not cfg.data:
        raise UsageError("prepare needs a data file (flag --data or config key data=)")
    series = ds.load_prices(cfg.data, symbol=cfg.symbol, history_depth=cfg.history_depth)
    split = ds.prepare_dataset(series, history_depth=cfg.history_depth,
                               record_limit=cfg.record_limit or None)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ds.write_rows_csv(split.train, out / "train.csv")
    ds.write_rows_csv(split.test, out / "test.csv")
    _write_json(out / "normalization.json", {
        **_provenance(cfg),
        "low": split.normalization.low,
        "high": split.normalization.high,
        "clamped": split.normalization.clamped,
        "train_rows": len(split.train),
        "test_rows": len(split.test),
        "dropped_rows": series.dropped_rows,
        "resorted": series.resorted,
    })
    print(f"prepared {len(split.train)} train / {len(split.test)} test rows -> {out}")
    return EXIT_OK


def cmd_train(cfg: RunConfig, mode: str, export_qubo: str | None = None) -> int:
    split = _load_split(cfg)
    out = Path(cfg.out)
    qrnn_config = cfg.qrnn()
    if mode == "classical":
        rows = [(r.feed_order(), r.label) for r in split.train]
        rep = train_classical(rows, qrnn_config, cfg.spsa())
        _write_json(out / "theta_classical.json", {
            **_provenance(cfg),
            "mode": "classical",
            "theta": [float(t) for t in rep.best_theta],
            "loss": rep.best_loss,
            "iterations": rep.iterations,
            "execution_count": rep.execution_count,
            "execution_unit": rep.execution_unit,
        })
        print(f"classical training: loss={rep.best_loss:.6f} "
              f"iterations={rep.iterations} ec={rep.execution_count} "
              f"elapsed={rep.elapsed_seconds:.3f}s")
        return EXIT_OK
    if mode != "adiabatic":
        raise UsageError(f"unknown training mode {mode!r}")
    layout = cfg.layout()
    disc = adia.discretize(cfg.parts, range_max=cfg.range_max)
    groups = adia.one_hot_groups(layout.total, cfg.parts)
    rows = [(r.window, r.label) for r in split.train]
    poly = adia.build_objective(rows, disc, layout)
    if export_qubo or cfg.solver == "anneal":
        lam = adia.estimate_penalty_lambda(poly, disc, layout.total)
        penalized = adia.add_one_hot_penalties(poly, disc, layout.total, lam)
        qubo = adia.quadratize(penalized, groups=groups)
        if export_qubo:
            adia.export_qubo(qubo, export_qubo)
    if cfg.solver == "exhaustive":
        result = adia.solve_exhaustive(poly, disc, groups)
    else:
        result = adia.solve_anneal(qubo, cfg.schedule(), disc, groups)
        if not result.feasible:
            raise adia.AdiabaticError(
                "annealer found no feasible sample; increase sweeps or reads")
    _write_json(out / "theta_adiabatic.json", {
        **_provenance(cfg),
        "mode": "adiabatic",
        "solver": cfg.solver,
        "parts": cfg.parts,
        "theta": [float(t) for t in result.decoded_theta],
        "energy": result.best_energy,
        "explored": result.explored_count,
        "feasible": result.feasible_count,
    })
    print(f"adiabatic training ({cfg.solver}): energy={result.best_energy:.6f} "
          f"explored={result.explored_count} feasible={result.feasible_count} "
          f"elapsed={result.elapsed_seconds:.3f}s")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, mode: str) -> int:
    split = _load_split(cfg)
    out = Path(cfg.out)
    theta_path = out / f"theta_{mode}.json"
    if not theta_path.exists():
        raise ds.DataError(f"{theta_path} not found; run `train --mode {mode}` first")
    payload = json.loads(theta_path.read_text())
    theta = np.array(payload["theta"], dtype=float)
    qrnn_config = cfg.qrnn()
    labels = rpt.qrnn_test_labels(split.test, theta, qrnn_config)
    accuracy = rpt.evaluate_accuracy(labels, [r.label for r in split.test])
    majority = rpt.majority_class_accuracy(split.train, split.test)
    _write_json(out / f"metrics_{mode}.json", {
        **_provenance(cfg),
        "mode": mode,
        "accuracy": accuracy,
        "majority_accuracy": majority,
        "test_rows": len(split.test),
        "theta": payload["theta"],
    })
    print(f"{mode}: accuracy={accuracy:.4f} ({accuracy:.0%}) "
          f"majority-baseline={majority:.4f} on {len(split.test)} test rows")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    split = _load_split(cfg)
    out = Path(cfg.out)
    results = rpt.run_comparison(
        split, cfg.qrnn(), cfg.spsa(), cfg.mlp(), parts=cfg.parts,
        solver=cfg.solver, schedule=cfg.schedule(), symbol=cfg.symbol,
    )
    rows = [r.as_row() for r in results]
    det_rows = [{k: v for k, v in row.items()
                 if k not in ("train_seconds", "solve_seconds")} for row in rows]
    _write_json(out / "report.json", {**_provenance(cfg), "scenarios": det_rows})
    _write_json(out / "timings.json", {**_provenance(cfg), "scenarios": [
        {"scenario": row["scenario"], "train_seconds": row["train_seconds"],
         "solve_seconds": row["solve_seconds"]} for row in rows]})
    columns = ["scenario", "symbol", "records", "accuracy", "majority_accuracy",
               "ec", "ec_unit"]
    table = rpt.render_table(det_rows, columns)
    (out / "report.txt").write_text(table + "\n")
    print(table)
    return EXIT_OK


def cmd_sweep_parts(cfg: RunConfig, parts_range) -> int:
    split = _load_split(cfg)
    out = Path(cfg.out)
    rows = rpt.sweep_parts(split, cfg.qrnn(), parts_range=parts_range)
    det_rows = [{k: v for k, v in row.items()
                 if k not in ("build_seconds", "solve_seconds")} for row in rows]
    _write_json(out / "sweep_parts.json", {**_provenance(cfg), "rows": det_rows})
    columns = ["parts", "variables", "explored", "feasible",
               "build_seconds", "solve_seconds"]
    table = rpt.render_table(
        [{**r, "build_seconds": f"{r['build_seconds']:.3f}",
          "solve_seconds": f"{r['solve_seconds']:.3f}"} for r in rows], columns)
    (out / "sweep_parts.txt").write_text(
        rpt.render_table(det_rows, ["parts", "variables", "explored", "feasible"]) + "\n")
    print(table)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrnn-trend",
                     description="Stock-trend QRNN with classical and adiabatic training")
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--parts", type=int, help="discretization granularity")
    parser.add_argument("--history-depth", dest="history_depth", type=int)
    parser.add_argument("--solver", choices=["exhaustive", "anneal"])
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--data", help="price CSV (Date/Close columns)")
    parser.add_argument("--symbol", help="ticker symbol tag")
    parser.add_argument("--record-limit", dest="record_limit", type=int)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("prepare", help="build the train/test row files")
    p_train = sub.add_parser("train", help="fit the ring angles")
    p_train.add_argument("--mode", choices=["classical", "adiabatic"], required=True)
    p_train.add_argument("--export-qubo", help="also write the quadratized model")
    p_eval = sub.add_parser("evaluate", help="score trained angles on the test split")
    p_eval.add_argument("--mode", choices=["classical", "adiabatic"], required=True)
    sub.add_parser("compare", help="run all three scenarios")
    p_sweep = sub.add_parser("sweep-parts", help="exhaustive-count table over granularities")
    p_sweep.add_argument("--min-parts", type=int, default=3)
    p_sweep.add_argument("--max-parts", type=int, default=6)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        cfg = build_config(args)
        if args.command == "prepare":
            return cmd_prepare(cfg)
        if args.command == "train":
            return cmd_train(cfg, args.mode, export_qubo=args.export_qubo)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.mode)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "sweep-parts":
            return cmd_sweep_parts(cfg, range(args.min_parts, args.max_parts + 1))
        raise UsageError(f"unknown command {args.command!r}")  # pragma: no cover
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ds.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (adia.AdiabaticError, OptimizationError, rpt.ReportError,
            SimulationError, mlpmod.TrainingDivergedError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
