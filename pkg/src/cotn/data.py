"""Time-series loading, cleaning, feature building and windowing.

The pipeline is deliberately explicit about repairs: cleaning never
deletes interior rows, it forward-fills them and records every action in
a report. Long gaps split the series into segments, and everything
downstream (rolling features, training windows) respects segment
boundaries so no window ever straddles a discontinuity.

Outlier passes (return filter for financial data, then a Z-score filter)
are iterated to a joint fixed point, which makes cleaning idempotent:
running clean() on its own output changes nothing.

Normalization statistics are always fitted on the training split alone
and applied everywhere, so later splits leak nothing backwards.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

__all__ = [
    "ParseError",
    "SCHEMAS",
    "CleaningAction",
    "RawSeries",
    "CleanConfig",
    "FeatureFrame",
    "NormStats",
    "WindowBatch",
    "SplitWindows",
    "Dataset",
    "load_csv",
    "clean",
    "rolling_mean",
    "rolling_std",
    "log_returns",
    "featurize",
    "fit_stats",
    "normalize",
    "denormalize_feature",
    "write_stats",
    "read_stats",
    "window",
    "build_dataset",
    "epoch_to_text",
]


class ParseError(ValueError):
    """Malformed input file; the message carries the line number."""


# Non-time columns per schema, in required order, plus the target column.
SCHEMAS: dict[str, dict] = {
    "ett": {
        "columns": ("HUFL", "HULL", "MUFL", "MULL", "LUFL", "LULL", "OT"),
        "target": "OT",
    },
    "ohlcv": {
        "columns": ("open", "high", "low", "close", "volume"),
        "target": "close",
    },
}

_FLOAT_FMT = "%.17g"
_EPOCH0 = datetime(1970, 1, 1)


def epoch_to_text(epoch: int) -> str:
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime(
        "%Y-%m-%d %H:%M:%S"
    )


@dataclass(frozen=True)
class CleaningAction:
    """One repair applied during cleaning."""

    epoch: int
    action: str  # "drop" | "fill" | "split"
    reason: str

    def render(self) -> str:
        return f"{epoch_to_text(self.epoch)} {self.action} {self.reason}"


@dataclass
class RawSeries:
    """A parsed series: epoch-second timestamps plus named float columns.

    segment_ids mark maximal runs free of long gaps (all zero before
    cleaning); report lists the repairs that produced this object.
    """

    schema: str
    epochs: np.ndarray
    columns: dict[str, np.ndarray]
    period: int
    segment_ids: np.ndarray
    report: list[CleaningAction] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return int(self.epochs.size)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(SCHEMAS[self.schema]["columns"])


def _parse_timestamp(text: str, line_no: int) -> int:
    try:
        dt = datetime.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"line {line_no}: bad timestamp {text!r}") from None
    if dt.tzinfo is not None:
        return int(round(dt.timestamp()))
    return int(round((dt - _EPOCH0).total_seconds()))


def _infer_period(epochs: np.ndarray) -> int:
    diffs = np.diff(epochs)
    diffs = diffs[diffs > 0]
    if diffs.size == 0:
        raise ParseError("cannot infer sampling period: no increasing timestamps")
    values, counts = np.unique(diffs, return_counts=True)
    return int(values[np.argmax(counts)])


def load_csv(path, schema: str, period: Optional[int] = None) -> RawSeries:
    """Parse a headered CSV into a RawSeries.

    The first column must hold ISO-8601 timestamps; the remaining columns
    must match the schema by name and order. Rows are sorted by time;
    duplicate timestamps are kept here and dropped by clean(). The
    sampling period (seconds) is inferred as the modal positive delta
    unless given.
    """
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}; expected one of {sorted(SCHEMAS)}")
    want = SCHEMAS[schema]["columns"]
    epochs: list[int] = []
    cols: list[list[float]] = [[] for _ in want]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if len(header) != 1 + len(want) or tuple(header[1:]) != want:
            raise ParseError(
                f"{path}: header {header!r} does not match schema {schema!r} "
                f"(expected timestamp column plus {list(want)})"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 1 + len(want):
                raise ParseError(
                    f"{path}: line {line_no}: expected {1 + len(want)} fields, "
                    f"got {len(row)}"
                )
            epochs.append(_parse_timestamp(row[0], line_no))
            for j, text in enumerate(row[1:]):
                try:
                    value = float(text)
                except ValueError:
                    raise ParseError(
                        f"{path}: line {line_no}: bad number {text!r} in "
                        f"column {want[j]!r}"
                    ) from None
                if not math.isfinite(value):
                    raise ParseError(
                        f"{path}: line {line_no}: non-finite value in column "
                        f"{want[j]!r}"
                    )
                cols[j].append(value)
    if not epochs:
        raise ParseError(f"{path}: no data rows")
    ep = np.asarray(epochs, dtype=np.int64)
    data = {name: np.asarray(col, dtype=np.float64) for name, col in zip(want, cols)}
    order = np.argsort(ep, kind="stable")
    if not np.all(order == np.arange(ep.size)):
        ep = ep[order]
        data = {name: col[order] for name, col in data.items()}
    inferred = period if period is not None else (
        _infer_period(ep) if ep.size > 1 else 1
    )
    if inferred < 1:
        raise ValueError(f"sampling period must be >= 1 second, got {inferred}")
    return RawSeries(
        schema=schema,
        epochs=ep,
        columns=data,
        period=int(inferred),
        segment_ids=np.zeros(ep.size, dtype=np.int64),
    )


@dataclass(frozen=True)
class CleanConfig:
    """Cleaning thresholds."""

    max_ffill_gap: int = 3
    z_max: float = 5.0
    return_limit: float = 0.20

    def __post_init__(self) -> None:
        if self.max_ffill_gap < 0:
            raise ValueError("max_ffill_gap must be >= 0")
        if self.z_max <= 0 or self.return_limit <= 0:
            raise ValueError("z_max and return_limit must be > 0")


def _dedup(
    ep: np.ndarray, cols: dict, seg: np.ndarray, report: list
) -> tuple[np.ndarray, dict, np.ndarray]:
    keep = np.ones(ep.size, dtype=bool)
    keep[1:] = ep[1:] != ep[:-1]
    for e in ep[~keep]:
        report.append(CleaningAction(int(e), "drop", "duplicate timestamp"))
    if keep.all():
        return ep, cols, seg
    return ep[keep], {k: v[keep] for k, v in cols.items()}, seg[keep]


def _fill_gaps(
    ep: np.ndarray, cols: dict, seg_in: np.ndarray, period: int,
    max_gap: int, report: list
) -> tuple[np.ndarray, dict, np.ndarray]:
    names = list(cols)
    out_ep: list[int] = [int(ep[0])]
    out_rows: list[list[float]] = [[cols[n][0] for n in names]]
    seg_ids: list[int] = [0]
    seg = 0
    for t in range(1, ep.size):
        delta = int(ep[t] - ep[t - 1])
        missing = int(round(delta / period)) - 1
        if missing > max_gap:
            seg += 1
            # Re-cleaning already-segmented data rediscovers the same
            # gaps; only report splits the input did not know about.
            if seg_in[t] == seg_in[t - 1]:
                report.append(
                    CleaningAction(
                        int(ep[t]), "split",
                        f"gap of {missing} periods before this row",
                    )
                )
        elif missing > 0:
            prev = out_rows[-1]
            for j in range(1, missing + 1):
                e_fill = int(ep[t - 1]) + j * period
                out_ep.append(e_fill)
                out_rows.append(list(prev))
                seg_ids.append(seg)
                report.append(
                    CleaningAction(e_fill, "fill", "gap forward-filled")
                )
        out_ep.append(int(ep[t]))
        out_rows.append([cols[n][t] for n in names])
        seg_ids.append(seg)
    arr = np.asarray(out_rows, dtype=np.float64)
    new_cols = {n: arr[:, j].copy() for j, n in enumerate(names)}
    return (
        np.asarray(out_ep, dtype=np.int64),
        new_cols,
        np.asarray(seg_ids, dtype=np.int64),
    )


def _return_pass(
    close: np.ndarray, rows: np.ndarray, seg: np.ndarray, limit: float,
    flagged: dict[int, str],
) -> bool:
    """Forward-fill rows whose close-to-close return exceeds the limit."""
    changed = False
    for t in range(1, rows.shape[0]):
        if seg[t] != seg[t - 1]:
            continue
        prev = close[t - 1]
        if prev == 0.0:
            continue
        ret = close[t] / prev - 1.0
        if abs(ret) > limit:
            rows[t] = rows[t - 1]
            close[t] = close[t - 1]
            changed = True
            flagged.setdefault(t, f"one-step return {ret:+.4f} beyond limit")
    return changed


def _zscore_pass(
    rows: np.ndarray, seg: np.ndarray, names: list[str], z_max: float,
    flagged: dict[int, str],
) -> bool:
    """Forward-fill rows where any column sits beyond z_max deviations."""
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    live = std > 0.0
    if not live.any():
        return False
    changed = False
    for t in range(1, rows.shape[0]):
        if seg[t] != seg[t - 1]:
            continue
        z = np.zeros(rows.shape[1])
        z[live] = np.abs(rows[t, live] - mean[live]) / std[live]
        worst = int(np.argmax(z))
        if z[worst] > z_max and not np.array_equal(rows[t], rows[t - 1]):
            flagged.setdefault(
                t, f"column {names[worst]} z-score {z[worst]:.2f} beyond {z_max:g}"
            )
            rows[t] = rows[t - 1]
            changed = True
    return changed


def clean(raw: RawSeries, cfg: CleanConfig = CleanConfig()) -> RawSeries:
    """Repair a raw series: dedup, fill short gaps, segment long ones,
    then forward-fill outliers until nothing is left to flag.

    Outlier rows (excessive one-step close return on financial data, or
    any column beyond z_max standard deviations) are replaced with the
    previous row of the same segment, never deleted. Both filters rerun
    until a full sweep changes nothing, so the function is idempotent.
    """
    if raw.n_rows == 0:
        raise ValueError("cannot clean an empty series")
    report: list[CleaningAction] = []
    ep, cols, seg_in = _dedup(raw.epochs, raw.columns, raw.segment_ids, report)
    ep, cols, seg = _fill_gaps(ep, cols, seg_in, raw.period, cfg.max_ffill_gap, report)
    names = list(cols)
    rows = np.stack([cols[n] for n in names], axis=1)
    close_idx = names.index("close") if raw.schema == "ohlcv" else None
    flagged: dict[int, str] = {}
    for _ in range(rows.shape[0] + 1):
        changed = False
        if close_idx is not None:
            changed |= _return_pass(
                rows[:, close_idx], rows, seg, cfg.return_limit, flagged
            )
        changed |= _zscore_pass(rows, seg, names, cfg.z_max, flagged)
        if not changed:
            break
    for t in sorted(flagged):
        report.append(CleaningAction(int(ep[t]), "fill", flagged[t]))
    return RawSeries(
        schema=raw.schema,
        epochs=ep,
        columns={n: rows[:, j].copy() for j, n in enumerate(names)},
        period=raw.period,
        segment_ids=seg,
        report=report,
    )


# -- features ---------------------------------------------------------------


def rolling_mean(values: np.ndarray, window: int) -> np.ndarray:
    """Trailing mean over the last ``window`` samples.

    out[i] averages values[i-window+1 .. i] and is defined from
    i = window - 1; earlier entries are NaN.
    """
    v = np.asarray(values, dtype=np.float64)
    if window < 1 or window > v.size:
        raise ValueError(f"window must be in 1..{v.size}, got {window}")
    out = np.full(v.size, np.nan)
    csum = np.concatenate([[0.0], np.cumsum(v)])
    out[window - 1 :] = (csum[window:] - csum[:-window]) / window
    return out


def rolling_std(values: np.ndarray, window: int) -> np.ndarray:
    """Trailing population standard deviation over ``window`` samples."""
    v = np.asarray(values, dtype=np.float64)
    if window < 1 or window > v.size:
        raise ValueError(f"window must be in 1..{v.size}, got {window}")
    out = np.full(v.size, np.nan)
    for i in range(window - 1, v.size):
        out[i] = np.std(v[i - window + 1 : i + 1])
    return out


def log_returns(values: np.ndarray) -> np.ndarray:
    """ln(v[i] / v[i-1]); the first entry is NaN. Values must be > 0."""
    v = np.asarray(values, dtype=np.float64)
    if np.any(v <= 0):
        raise ValueError("log returns need strictly positive values")
    out = np.full(v.size, np.nan)
    out[1:] = np.log(v[1:] / v[:-1])
    return out


@dataclass
class FeatureFrame:
    """Feature matrix derived from a cleaned series.

    data is (n_rows, n_features) aligned with epochs and segment_ids;
    target names the column forecast targets are read from.
    """

    epochs: np.ndarray
    segment_ids: np.ndarray
    data: np.ndarray
    feature_names: tuple[str, ...]
    target: str
    period: int

    def __post_init__(self) -> None:
        if self.data.ndim != 2 or self.data.shape[1] != len(self.feature_names):
            raise ValueError(
                f"data shape {self.data.shape} does not match "
                f"{len(self.feature_names)} feature names"
            )
        if self.epochs.size != self.data.shape[0] or self.segment_ids.size != self.data.shape[0]:
            raise ValueError("epochs/segment_ids/data row counts disagree")
        if self.target not in self.feature_names:
            raise ValueError(f"target {self.target!r} not among {self.feature_names}")

    @property
    def n_rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.data.shape[1])

    @property
    def target_index(self) -> int:
        return self.feature_names.index(self.target)

    def slice_rows(self, start: int, stop: int) -> "FeatureFrame":
        return FeatureFrame(
            self.epochs[start:stop],
            self.segment_ids[start:stop],
            self.data[start:stop],
            self.feature_names,
            self.target,
            self.period,
        )


_FINANCIAL_MAX_WINDOW = 20


def featurize(raw: RawSeries) -> FeatureFrame:
    """Build the model-facing feature matrix from a cleaned series.

    ETT data passes through as-is with OT as the target. Financial data
    adds the log-return of close, 5- and 20-step moving averages of close
    and the 20-step rolling standard deviation of log-returns; rolling
    features are computed inside each segment and each segment's leading
    rows (where some feature is undefined) are dropped.
    """
    names = list(raw.column_names)
    if raw.schema == "ett":
        data = np.stack([raw.columns[n] for n in names], axis=1)
        return FeatureFrame(
            raw.epochs.copy(), raw.segment_ids.copy(), data,
            tuple(names), SCHEMAS["ett"]["target"], raw.period,
        )
    # Financial: per-segment rolling features, leading rows dropped.
    out_rows, out_ep, out_seg = [], [], []
    feature_names = tuple(names) + ("log_ret", "ma5", "ma20", "vol20")
    for seg_id in np.unique(raw.segment_ids):
        idx = np.where(raw.segment_ids == seg_id)[0]
        if idx.size <= _FINANCIAL_MAX_WINDOW:
            continue
        close = raw.columns["close"][idx]
        rets = log_returns(close)
        ma5 = rolling_mean(close, 5)
        ma20 = rolling_mean(close, 20)
        # vol20 needs 20 returns; returns start at row 1 of the segment.
        vol20 = np.full(idx.size, np.nan)
        vol = rolling_std(rets[1:], _FINANCIAL_MAX_WINDOW)
        vol20[1:] = vol
        base = np.stack([raw.columns[n][idx] for n in names], axis=1)
        seg_data = np.concatenate(
            [base, np.stack([rets, ma5, ma20, vol20], axis=1)], axis=1
        )
        keep = slice(_FINANCIAL_MAX_WINDOW, None)
        out_rows.append(seg_data[keep])
        out_ep.append(raw.epochs[idx][keep])
        out_seg.append(raw.segment_ids[idx][keep])
    if not out_rows:
        raise ValueError(
            f"series too short for rolling features: every segment needs "
            f"more than {_FINANCIAL_MAX_WINDOW} rows"
        )
    data = np.concatenate(out_rows, axis=0)
    if not np.all(np.isfinite(data)):
        raise ValueError("internal error: undefined feature values survived")
    return FeatureFrame(
        np.concatenate(out_ep), np.concatenate(out_seg), data,
        feature_names, SCHEMAS["ohlcv"]["target"], raw.period,
    )


# -- normalization ------------------------------------------------------------


@dataclass(frozen=True)
class NormStats:
    """Per-feature mean/std fitted on a training slice.

    Constant features (std exactly 0) are listed in dropped and excluded
    from names/mean/std.
    """

    names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    dropped: tuple[str, ...] = ()

    def index_of(self, feature: str) -> int:
        try:
            return self.names.index(feature)
        except ValueError:
            raise KeyError(f"feature {feature!r} not in stats") from None


def fit_stats(frame: FeatureFrame) -> NormStats:
    """Fit normalization statistics on the given (training) frame."""
    if frame.n_rows < 2:
        raise ValueError("need at least 2 rows to fit normalization stats")
    mean = frame.data.mean(axis=0)
    std = frame.data.std(axis=0)
    live = std > 0.0
    dropped = tuple(n for n, ok in zip(frame.feature_names, live) if not ok)
    if frame.target in dropped:
        raise ValueError(f"target {frame.target!r} is constant on the training split")
    return NormStats(
        names=tuple(n for n, ok in zip(frame.feature_names, live) if ok),
        mean=mean[live],
        std=std[live],
        dropped=dropped,
    )


def normalize(frame: FeatureFrame, stats: NormStats) -> FeatureFrame:
    """Standardize a frame with stats fitted elsewhere; drops constants."""
    cols = []
    for name in stats.names:
        if name not in frame.feature_names:
            raise ValueError(f"frame lacks feature {name!r}")
        cols.append(frame.feature_names.index(name))
    data = (frame.data[:, cols] - stats.mean) / stats.std
    return FeatureFrame(
        frame.epochs.copy(), frame.segment_ids.copy(), data,
        stats.names, frame.target, frame.period,
    )


def denormalize_feature(values: np.ndarray, stats: NormStats, feature: str) -> np.ndarray:
    """Invert normalization for one feature column."""
    j = stats.index_of(feature)
    return np.asarray(values, dtype=np.float64) * stats.std[j] + stats.mean[j]


def write_stats(path, stats: NormStats) -> None:
    """Write stats as ``feature,mean,std`` rows (17 significant digits)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("feature,mean,std\n")
        for name, m, s in zip(stats.names, stats.mean, stats.std):
            fh.write(f"{name},{_FLOAT_FMT % m},{_FLOAT_FMT % s}\n")
        for name in stats.dropped:
            fh.write(f"# dropped,{name}\n")


def read_stats(path) -> NormStats:
    names: list[str] = []
    mean: list[float] = []
    std: list[float] = []
    dropped: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "feature,mean,std":
            raise ParseError(f"{path}: bad stats header {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("# dropped,"):
                dropped.append(line.split(",", 1)[1])
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"{path}: line {line_no}: expected 3 fields")
            names.append(parts[0])
            mean.append(float(parts[1]))
            std.append(float(parts[2]))
    return NormStats(tuple(names), np.asarray(mean), np.asarray(std), tuple(dropped))


# -- windows ------------------------------------------------------------------


@dataclass
class WindowBatch:
    """Stacked forecasting windows.

    enc is (n, enc_len, F); dec is (n, label_len + horizon, F) with the
    final horizon rows zeroed as decoder placeholders; tgt is
    (n, horizon, 1) read from the target feature; starts holds each
    window's first row index in the source frame.
    """

    enc: np.ndarray
    dec: np.ndarray
    tgt: np.ndarray
    starts: np.ndarray

    @property
    def n_windows(self) -> int:
        return int(self.enc.shape[0])


@dataclass
class SplitWindows:
    """Chronological train/val/test windows plus the row boundaries used."""

    train: WindowBatch
    val: WindowBatch
    test: WindowBatch
    boundaries: tuple[int, int, int]


@dataclass
class Dataset:
    """Normalized windows plus the statistics that produced them."""

    splits: SplitWindows
    stats: NormStats
    frame: FeatureFrame  # normalized


def _empty_batch(enc_len: int, label_len: int, horizon: int, n_feat: int) -> WindowBatch:
    return WindowBatch(
        enc=np.empty((0, enc_len, n_feat)),
        dec=np.empty((0, label_len + horizon, n_feat)),
        tgt=np.empty((0, horizon, 1)),
        starts=np.empty(0, dtype=np.int64),
    )


def _windows_in_range(
    frame: FeatureFrame, row_lo: int, row_hi: int,
    enc_len: int, label_len: int, horizon: int, stride: int,
) -> WindowBatch:
    total = enc_len + horizon
    enc_list, dec_list, tgt_list, starts = [], [], [], []
    t_idx = frame.target_index
    seg = frame.segment_ids
    s = row_lo
    while s + total <= row_hi:
        if np.all(seg[s : s + total] == seg[s]):
            enc_list.append(frame.data[s : s + enc_len])
            known = frame.data[s + enc_len - label_len : s + enc_len]
            pad = np.zeros((horizon, frame.n_features))
            dec_list.append(np.concatenate([known, pad], axis=0))
            tgt_list.append(frame.data[s + enc_len : s + total, t_idx : t_idx + 1])
            starts.append(s)
        s += stride
    if not enc_list:
        return _empty_batch(enc_len, label_len, horizon, frame.n_features)
    return WindowBatch(
        enc=np.stack(enc_list),
        dec=np.stack(dec_list),
        tgt=np.stack(tgt_list),
        starts=np.asarray(starts, dtype=np.int64),
    )


def window(
    frame: FeatureFrame,
    enc_len: int,
    label_len: int,
    horizon: int,
    stride: int = 1,
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
) -> SplitWindows:
    """Cut chronological train/val/test windows out of a frame.

    The frame is split by row count at the given ratios; a window must
    lie entirely inside one split and one segment (targets included), so
    splits stay disjoint in time and discontinuities are never crossed.
    """
    if not (1 <= label_len <= enc_len):
        raise ValueError(f"need 1 <= label_len <= enc_len, got {label_len}, {enc_len}")
    if horizon < 1 or stride < 1:
        raise ValueError("horizon and stride must be >= 1")
    if len(ratios) != 3 or any(r < 0 for r in ratios) or not math.isclose(
        sum(ratios), 1.0, rel_tol=0, abs_tol=1e-9
    ):
        raise ValueError(f"ratios must be 3 non-negative numbers summing to 1, got {ratios}")
    n = frame.n_rows
    i_train = int(math.floor(ratios[0] * n))
    i_val = int(math.floor((ratios[0] + ratios[1]) * n))
    make = lambda lo, hi: _windows_in_range(
        frame, lo, hi, enc_len, label_len, horizon, stride
    )
    return SplitWindows(
        train=make(0, i_train),
        val=make(i_train, i_val),
        test=make(i_val, n),
        boundaries=(i_train, i_val, n),
    )


def build_dataset(
    frame: FeatureFrame,
    enc_len: int,
    label_len: int,
    horizon: int,
    stride: int = 1,
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
) -> Dataset:
    """Fit stats on the training rows, normalize, and cut windows."""
    n = frame.n_rows
    i_train = int(math.floor(ratios[0] * n))
    if i_train < 2:
        raise ValueError(f"training split of {i_train} rows is too small")
    stats = fit_stats(frame.slice_rows(0, i_train))
    norm = normalize(frame, stats)
    splits = window(norm, enc_len, label_len, horizon, stride, ratios)
    if splits.train.n_windows == 0:
        raise ValueError("training split produced no windows")
    return Dataset(splits=splits, stats=stats, frame=norm)
