"""Price ingestion, normalization, windowing, and the chronological split."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    pass


@dataclass
class PriceSeries:
    symbol: str
    dates: list
    closes: np.ndarray
    dropped_rows: int = 0
    resorted: bool = False


@dataclass
class NormalizationRecord:
    low: float
    high: float
    clamped: int = 0


@dataclass(frozen=True)
class TrendRow:
    """Normalized window, most recent value first, with the next-step trend label."""

    window: tuple
    label: int

    def feed_order(self) -> tuple:
        """Window values in the order the recurrent circuit consumes them (oldest first)."""
        return self.window[::-1]


@dataclass
class SplitDataset:
    train: list
    test: list
    normalization: NormalizationRecord


def load_prices(path, symbol: str = "", history_depth: int = 3) -> PriceSeries:
    """Read a Date/Close CSV export; rows with missing closes are dropped."""
    entries = []
    dropped = 0
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "Date" not in reader.fieldnames \
                    or "Close" not in reader.fieldnames:
                raise DataError(f"{path}: need a header with Date and Close columns")
            for row in reader:
                raw = (row.get("Close") or "").strip()
                if not raw:
                    dropped += 1
                    continue
                try:
                    close = float(raw)
                except ValueError as exc:
                    raise DataError(f"{path}: unparseable close value {raw!r}") from exc
                if close <= 0:
                    raise DataError(f"{path}: non-positive close {close}")
                entries.append(((row.get("Date") or "").strip(), close))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(entries) < history_depth + 2:
        raise DataError(
            f"{path}: only {len(entries)} usable rows, need at least {history_depth + 2}"
        )
    resorted = any(entries[i][0] > entries[i + 1][0] for i in range(len(entries) - 1))
    if resorted:
        entries.sort(key=lambda e: e[0])
    return PriceSeries(
        symbol=symbol,
        dates=[d for d, _ in entries],
        closes=np.array([c for _, c in entries], dtype=float),
        dropped_rows=dropped,
        resorted=resorted,
    )


def fit_normalization(values) -> NormalizationRecord:
    values = np.asarray(values, dtype=float)
    if values.size < 2 or float(values.max()) == float(values.min()):
        raise DataError("normalization needs at least two distinct values")
    return NormalizationRecord(low=float(values.min()), high=float(values.max()))


def apply_normalization(values, record: NormalizationRecord) -> np.ndarray:
    """Min-max scale with clamping to [0, 1]; clamp events are counted on the record."""
    values = np.asarray(values, dtype=float)
    scaled = (values - record.low) / (record.high - record.low)
    record.clamped += int(np.count_nonzero((scaled < 0.0) | (scaled > 1.0)))
    return np.clip(scaled, 0.0, 1.0)


def make_rows(values, history_depth: int, label_values=None) -> list:
    """One row per day t with a known next close: window of the last H values
    (most recent first), label 1 iff the next close is strictly higher."""
    values = np.asarray(values, dtype=float)
    labels_from = values if label_values is None else np.asarray(label_values, dtype=float)
    if len(labels_from) != len(values):
        raise DataError("label series length must match the value series")
    if len(values) < history_depth + 1:
        raise DataError(
            f"need at least {history_depth + 1} values for history depth {history_depth}"
        )
    rows = []
    for t in range(history_depth - 1, len(values) - 1):
        window = tuple(float(values[t - i]) for i in range(history_depth))
        label = 1 if labels_from[t + 1] > labels_from[t] else 0
        rows.append(TrendRow(window=window, label=label))
    return rows


def split_80_20(rows) -> tuple:
    """Chronological holdout: the last floor(0.2 n) rows are the test set."""
    if len(rows) < 5:
        raise DataError(f"need at least 5 rows to split, got {len(rows)}")
    n_test = math.floor(0.2 * len(rows))
    return list(rows[: len(rows) - n_test]), list(rows[len(rows) - n_test:])


def prepare_dataset(series: PriceSeries, history_depth: int = 3,
                    record_limit: int | None = None) -> SplitDataset:
    """Window, label, normalize, and split without look-ahead.

    Normalization statistics come only from the prices visible to the
    training rows (up to and including the last training label).
    """
    closes = series.closes
    if record_limit is not None:
        if record_limit < history_depth + 2:
            raise DataError(f"record limit {record_limit} is too small")
        closes = closes[-record_limit:]
    n_rows = len(closes) - history_depth
    if n_rows < 5:
        raise DataError("series too short for a meaningful split")
    n_test = math.floor(0.2 * n_rows)
    n_train = n_rows - n_test
    last_train_label_idx = (history_depth - 1) + n_train - 1 + 1
    record = fit_normalization(closes[: last_train_label_idx + 1])
    normalized = apply_normalization(closes, record)
    rows = make_rows(normalized, history_depth, label_values=closes)
    train, test = split_80_20(rows)
    return SplitDataset(train=train, test=test, normalization=record)


def write_rows_csv(rows, path):
    """Serialize rows in the x(t), x(t-1), ..., y(t) column layout."""
    if not rows:
        raise DataError("no rows to write")
    depth = len(rows[0].window)
    header = [f"x(t-{i})" if i else "x(t)" for i in range(depth)] + ["y(t)"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) for v in row.window] + [row.label])


def read_rows_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "y(t)":
            raise DataError(f"{path}: not a trend-row file")
        depth = len(header) - 1
        rows = []
        for rec in reader:
            if len(rec) != depth + 1:
                raise DataError(f"{path}: malformed row {rec!r}")
            rows.append(TrendRow(window=tuple(float(v) for v in rec[:depth]),
                                 label=int(rec[depth])))
    return rows
