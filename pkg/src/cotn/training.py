"""Training protocol: stages, warm starts, type sweeps and paired trials.

A training run minimizes forecast MSE on normalized windows plus a small
distillation consistency term, with per-window anomaly weights softly
down-weighting suspect samples. Validation loss (plain normalized MSE)
drives early stopping and best-checkpoint selection; reported MAE/MSE
are computed on denormalized values.

Determinism contract: every stochastic choice (parameter init, batch
order, autoencoder fit, synthetic data) flows from explicit integer
seeds through numpy Generators, so two runs with identical configs agree
bit-for-bit on everything except wall-clock time.

Warm starting trains with GELU for a few epochs, then swaps the gated
activation in place (parameters carried bit-exactly) and fine-tunes all
parameters for the remaining budget. The degenerate pretrain_epochs=0
plan consumes no randomness in stage one and is therefore bit-identical
to direct training.
"""

from __future__ import annotations

import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import tensor as te
from .data import Dataset, FeatureFrame, denormalize_feature
from .model import (
    ActivationMode,
    Autoencoder,
    Forecaster,
    ModelConfig,
    distill_loss,
)

__all__ = [
    "TrainConfig",
    "TrialReport",
    "StatsSummary",
    "SweepEntry",
    "SweepResult",
    "Adam",
    "mae",
    "mse",
    "fit_autoencoder",
    "train_stage",
    "two_stage_train",
    "run_training",
    "sweep_types",
    "multi_trial",
    "make_synthetic_series",
    "make_synthetic_frame",
    "write_synthetic_ett_csv",
    "write_trial_report",
    "read_trial_report",
    "write_summary",
]

_FLOAT_FMT = "%.17g"

_SUMMARY_METRICS = ("val_mae", "val_mse", "test_mae", "test_mse",
                    "epochs_to_convergence")


def mae(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean absolute error over all elements."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("cannot score empty arrays")
    return float(np.mean(np.abs(p - t)))


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over all elements."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("cannot score empty arrays")
    return float(np.mean((p - t) ** 2))


class Adam:
    """Adaptive moment estimation over a named parameter dict."""

    def __init__(self, params: dict[str, te.Tensor], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in params.items()}

    def step(self, lr: Optional[float] = None) -> None:
        lr = self.lr if lr is None else lr
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, p in self.params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            m = self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            v = self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * (g * g)
            p.data = p.data - lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def _cosine_lr(base: float, epoch: int, total: int) -> float:
    if total <= 0:
        return base
    return base * 0.5 * (1.0 + math.cos(math.pi * epoch / total))


@dataclass(frozen=True)
class TrainConfig:
    """One training run's hyperparameters and plan."""

    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    lr_schedule: str = "cosine"  # "cosine" | "constant"
    seed: int = 1
    patience: int = 10
    w_distill: float = 0.05
    plan: str = "direct"  # "direct" | "warm_start"
    pretrain_epochs: int = 0
    activation: ActivationMode = field(default_factory=ActivationMode)
    anomaly_weighting: bool = True
    ae_hidden: int = 32
    ae_bottleneck: int = 8
    ae_epochs: int = 40

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1 or self.patience < 0:
            raise ValueError("epochs/batch_size must be >= 1 and patience >= 0")
        if self.lr <= 0 or self.w_distill < 0:
            raise ValueError("lr must be > 0 and w_distill >= 0")
        if self.lr_schedule not in ("cosine", "constant"):
            raise ValueError(f"unknown lr schedule {self.lr_schedule!r}")
        if self.plan not in ("direct", "warm_start"):
            raise ValueError(f"unknown plan {self.plan!r}")
        if not 0 <= self.pretrain_epochs <= self.epochs:
            raise ValueError(
                f"pretrain_epochs must be in 0..epochs, got {self.pretrain_epochs}"
            )


@dataclass(frozen=True)
class TrialReport:
    """Outcome of one training run.

    Two runs with identical seeds produce identical reports except for
    wall_time_s; metric_dict() exposes exactly the reproducible part.
    """

    seed: int
    activation: str
    plan: str
    epochs_run: int
    epochs_to_convergence: int
    best_val_loss: float
    train_mae: float
    train_mse: float
    val_mae: float
    val_mse: float
    test_mae: float
    test_mse: float
    wall_time_s: float

    def metric_dict(self) -> dict[str, float]:
        d = {
            "seed": self.seed,
            "activation": self.activation,
            "plan": self.plan,
            "epochs_run": self.epochs_run,
            "epochs_to_convergence": self.epochs_to_convergence,
            "best_val_loss": self.best_val_loss,
            "train_mae": self.train_mae,
            "train_mse": self.train_mse,
            "val_mae": self.val_mae,
            "val_mse": self.val_mse,
            "test_mae": self.test_mae,
            "test_mse": self.test_mse,
        }
        return d


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return _FLOAT_FMT % v
    return str(v)


def write_trial_report(path, report: TrialReport) -> None:
    """Write a report as ``key = value`` lines (wall time included)."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in report.metric_dict().items():
            fh.write(f"{key} = {_fmt_value(val)}\n")
        fh.write(f"wall_time_s = {_FLOAT_FMT % report.wall_time_s}\n")


def read_trial_report(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, val = line.partition(" = ")
            out[key] = val
    return out


# -- loss/metric helpers ------------------------------------------------------


def _batched_predict(model: Forecaster, enc: np.ndarray, dec: np.ndarray,
                     chunk: int = 512) -> np.ndarray:
    parts = []
    for lo in range(0, enc.shape[0], chunk):
        parts.append(model.predict(enc[lo : lo + chunk], dec[lo : lo + chunk]))
    return np.concatenate(parts, axis=0)


def _val_loss(model: Forecaster, dataset: Dataset) -> float:
    batch = dataset.splits.val
    if batch.n_windows == 0:
        raise ValueError("validation split has no windows")
    pred = _batched_predict(model, batch.enc, batch.dec)
    return mse(pred, batch.tgt)


def _split_metrics(model: Forecaster, dataset: Dataset, which: str) -> tuple[float, float]:
    batch = getattr(dataset.splits, which)
    if batch.n_windows == 0:
        return math.nan, math.nan
    pred = _batched_predict(model, batch.enc, batch.dec)
    target_name = dataset.frame.target
    p = denormalize_feature(pred, dataset.stats, target_name)
    t = denormalize_feature(batch.tgt, dataset.stats, target_name)
    return mae(p, t), mse(p, t)


def _epochs_to_convergence(history: list[float]) -> int:
    best = min(history)
    threshold = best * 1.01
    for idx, v in enumerate(history, start=1):
        if v <= threshold:
            return idx
    return len(history)  # unreachable; best itself satisfies the bound


# -- autoencoder fitting ------------------------------------------------------


def fit_autoencoder(
    windows: np.ndarray,
    hidden: int = 32,
    bottleneck: int = 8,
    seed: int = 0,
    epochs: int = 40,
    batch_size: int = 64,
    lr: float = 1e-3,
) -> Autoencoder:
    """Train a window autoencoder on reconstruction MSE and fit its
    anomaly threshold on the same windows."""
    w = np.asarray(windows, dtype=np.float64)
    if w.ndim != 3 or w.shape[0] < 1:
        raise ValueError(f"expected (n, window_len, n_features) windows, got {w.shape}")
    n, length, feats = w.shape
    ae = Autoencoder(length, feats, hidden=hidden, bottleneck=bottleneck, seed=seed)
    flat = w.reshape(n, -1)
    rng = np.random.default_rng(seed)
    opt = Adam(ae.params, lr=lr)
    for epoch in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = order[lo : lo + batch_size]
            x = te.constant(flat[idx])
            diff = te.sub(ae.reconstruct(x), x)
            loss = te.mean_all(te.mul(diff, diff))
            if not math.isfinite(loss.item()):
                raise RuntimeError(f"autoencoder diverged at epoch {epoch + 1}")
            for p in ae.params.values():
                p.grad = None
            te.backward(loss)
            opt.step(_cosine_lr(lr, epoch, epochs))
    ae.fit_threshold(w)
    return ae


# -- core stage loop ----------------------------------------------------------


def _stage_loop(
    model: Forecaster,
    dataset: Dataset,
    cfg: TrainConfig,
    rng: np.random.Generator,
    epochs: int,
    weights: Optional[np.ndarray],
) -> tuple[list[float], int]:
    """Train in place for up to ``epochs`` epochs with early stopping.

    Returns the per-epoch validation history and the number of epochs
    actually run; on exit the model holds the stage-best parameters.
    """
    if epochs == 0:
        return [], 0
    train = dataset.splits.train
    n = train.n_windows
    if n == 0:
        raise ValueError("training split has no windows")
    w_sum = float(weights.sum()) if weights is not None else float(n)
    opt = Adam(model.params, lr=cfg.lr)
    history: list[float] = []
    best_val = math.inf
    best_state: Optional[dict[str, np.ndarray]] = None
    since_best = 0
    for epoch in range(epochs):
        lr = (
            _cosine_lr(cfg.lr, epoch, epochs)
            if cfg.lr_schedule == "cosine"
            else cfg.lr
        )
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            pred, pairs = model.forward(train.enc[idx], train.dec[idx])
            diff = te.sub(pred, te.constant(train.tgt[idx]))
            sq = te.mul(diff, diff)
            if weights is not None:
                wb = weights[idx]
                sq = te.mul(sq, te.constant(wb.reshape(-1, 1, 1)))
                base = te.scale(te.mean_all(sq), idx.size / float(wb.sum()))
            else:
                base = te.mean_all(sq)
            loss = base
            if cfg.w_distill > 0 and pairs:
                d_total = None
                for pre, pooled in pairs:
                    term = distill_loss(pre, pooled)
                    d_total = term if d_total is None else te.add(d_total, term)
                loss = te.add(
                    base, te.scale(d_total, cfg.w_distill / len(pairs))
                )
            if not math.isfinite(loss.item()):
                raise RuntimeError(
                    f"training diverged (non-finite loss) at epoch {epoch + 1}"
                )
            model.zero_grad()
            te.backward(loss)
            opt.step(lr)
        val = _val_loss(model, dataset)
        history.append(val)
        if val < best_val:
            best_val = val
            best_state = model.state_arrays()
            since_best = 0
        else:
            since_best += 1
            if since_best > cfg.patience:
                break
    if best_state is not None:
        model.load_state_arrays(best_state)
    return history, len(history)


def _anomaly_weights(dataset: Dataset, cfg: TrainConfig) -> Optional[np.ndarray]:
    if not cfg.anomaly_weighting:
        return None
    train = dataset.splits.train
    ae = fit_autoencoder(
        train.enc,
        hidden=cfg.ae_hidden,
        bottleneck=cfg.ae_bottleneck,
        seed=cfg.seed,
        epochs=cfg.ae_epochs,
    )
    return ae.weights(train.enc)


def _finish_report(
    model: Forecaster,
    dataset: Dataset,
    cfg: TrainConfig,
    history: list[float],
    epochs_run: int,
    t0: float,
) -> TrialReport:
    final_val = _val_loss(model, dataset)
    train_mae, train_mse = _split_metrics(model, dataset, "train")
    val_mae, val_mse = _split_metrics(model, dataset, "val")
    test_mae, test_mse = _split_metrics(model, dataset, "test")
    return TrialReport(
        seed=cfg.seed,
        activation=model.activation.name,
        plan=cfg.plan,
        epochs_run=epochs_run,
        epochs_to_convergence=_epochs_to_convergence(history),
        best_val_loss=final_val,
        train_mae=train_mae,
        train_mse=train_mse,
        val_mae=val_mae,
        val_mse=val_mse,
        test_mae=test_mae,
        test_mse=test_mse,
        wall_time_s=time.perf_counter() - t0,
    )


def train_stage(
    model: Forecaster,
    dataset: Dataset,
    cfg: TrainConfig,
    activation_mode: ActivationMode,
) -> TrialReport:
    """Train one stage under a single activation mode.

    Minimizes anomaly-weighted forecast MSE plus w_distill times the
    distillation consistency loss, with Adam and an optional cosine
    schedule; early stopping keeps the best-validation parameters.
    """
    t0 = time.perf_counter()
    model.set_activation(activation_mode)
    weights = _anomaly_weights(dataset, cfg)
    rng = np.random.default_rng(cfg.seed)
    history, epochs_run = _stage_loop(
        model, dataset, cfg, rng, cfg.epochs, weights
    )
    return _finish_report(model, dataset, cfg, history, epochs_run, t0)


def two_stage_train(model: Forecaster, dataset: Dataset, cfg: TrainConfig) -> TrialReport:
    """GELU pretrain, in-place swap to the target activation, fine-tune.

    Stage one runs pretrain_epochs under GELU; the swap touches no
    parameter; stage two fine-tunes all parameters for the remaining
    budget. Validation histories concatenate for the convergence measure.
    """
    t0 = time.perf_counter()
    weights = _anomaly_weights(dataset, cfg)
    rng = np.random.default_rng(cfg.seed)
    stage1 = min(cfg.pretrain_epochs, cfg.epochs)
    stage2 = cfg.epochs - stage1
    model.set_activation(ActivationMode(kind="gelu"))
    h1, run1 = _stage_loop(model, dataset, cfg, rng, stage1, weights)
    model.set_activation(cfg.activation)
    h2, run2 = _stage_loop(model, dataset, cfg, rng, stage2, weights)
    return _finish_report(model, dataset, cfg, h1 + h2, run1 + run2, t0)


def run_training(
    dataset: Dataset, model_cfg: ModelConfig, cfg: TrainConfig
) -> tuple[Forecaster, TrialReport]:
    """Build a model per the config's plan and train it."""
    model_cfg = replace(
        model_cfg,
        activation=cfg.activation if cfg.plan == "direct" else ActivationMode(kind="gelu"),
    )
    model = Forecaster(model_cfg, seed=cfg.seed)
    if cfg.plan == "warm_start":
        report = two_stage_train(model, dataset, cfg)
    else:
        report = train_stage(model, dataset, cfg, cfg.activation)
    return model, report


# -- sweeps and trials --------------------------------------------------------


@dataclass(frozen=True)
class SweepEntry:
    type_id: int
    val_mae: float
    report: TrialReport


@dataclass(frozen=True)
class SweepResult:
    """Per-type results ranked by validation MAE (best first)."""

    entries: tuple[SweepEntry, ...]

    @property
    def winner(self) -> int:
        return self.entries[0].type_id


def _run_sweep_one(args) -> "SweepEntry":
    dataset, model_cfg, cfg, type_id = args
    mode = ActivationMode(kind="gated", type_id=type_id, lam=cfg.activation.lam)
    _, report = run_training(dataset, model_cfg, replace(cfg, activation=mode))
    return SweepEntry(type_id, report.val_mae, report)


def sweep_types(
    dataset: Dataset,
    model_cfg: ModelConfig,
    cfg: TrainConfig,
    type_ids: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8),
    jobs: int = 1,
) -> SweepResult:
    """Train one gated model per oscillator type under a shared seed and
    rank the types by validation MAE.

    Each type is an independent run, so jobs > 1 fans them out over
    processes; the ranking is identical either way.
    """
    work = [(dataset, model_cfg, cfg, t) for t in type_ids]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_run_sweep_one, work))
    else:
        entries = [_run_sweep_one(item) for item in work]
    ranked = tuple(sorted(entries, key=lambda e: (e.val_mae, e.type_id)))
    return SweepResult(ranked)


@dataclass(frozen=True)
class StatsSummary:
    """Aggregate of repeated paired trials.

    metrics/baseline_metrics map metric name -> {mean, median, std, min,
    max} over trials; win_rate is the fraction of seeds where the
    treatment beat the baseline on test MAE.
    """

    n_trials: int
    baseline_name: str
    metrics: dict[str, dict[str, float]]
    baseline_metrics: dict[str, dict[str, float]]
    win_rate: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_trials": self.n_trials,
                "baseline_name": self.baseline_name,
                "metrics": self.metrics,
                "baseline_metrics": self.baseline_metrics,
                "win_rate": self.win_rate,
            },
            sort_keys=True,
            indent=2,
        )


def _aggregate(values: list[float]) -> dict[str, float]:
    return {
        "mean": float(statistics.fmean(values)),
        "median": float(statistics.median(values)),
        "std": float(statistics.pstdev(values)),
        "min": float(min(values)),
        "max": float(max(values)),
    }


def _run_pair(args) -> tuple[TrialReport, TrialReport]:
    dataset, model_cfg, t_cfg, b_cfg, seed = args
    _, t_report = run_training(dataset, model_cfg, replace(t_cfg, seed=seed))
    _, b_report = run_training(dataset, model_cfg, replace(b_cfg, seed=seed))
    return t_report, b_report


def multi_trial(
    dataset: Dataset,
    model_cfg: ModelConfig,
    treatment_cfg: TrainConfig,
    baseline_cfg: TrainConfig,
    n_trials: int,
    jobs: int = 1,
    baseline_name: Optional[str] = None,
) -> StatsSummary:
    """Run seeds 1..n_trials over a treatment/baseline pair.

    Each seed trains both arms with identical data order and initial
    parameters; the summary aggregates treatment and baseline metrics
    and the paired test-MAE win rate of the treatment.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    name = baseline_name or f"{baseline_cfg.plan}/{baseline_cfg.activation.kind}"
    work = [
        (dataset, model_cfg, treatment_cfg, baseline_cfg, seed)
        for seed in range(1, n_trials + 1)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_pair, work))
    else:
        results = [_run_pair(item) for item in work]
    t_reports = [t for t, _ in results]
    b_reports = [b for _, b in results]
    wins = sum(1 for t, b in results if t.test_mae < b.test_mae)
    metrics = {
        key: _aggregate([getattr(r, key) for r in t_reports])
        for key in _SUMMARY_METRICS
    }
    baseline_metrics = {
        key: _aggregate([getattr(r, key) for r in b_reports])
        for key in _SUMMARY_METRICS
    }
    return StatsSummary(
        n_trials=n_trials,
        baseline_name=name,
        metrics=metrics,
        baseline_metrics=baseline_metrics,
        win_rate=wins / n_trials,
    )


def write_summary(path_text, path_json, summary: StatsSummary) -> None:
    """Write a summary as key=value lines plus a JSON twin."""
    with open(path_text, "w", encoding="utf-8") as fh:
        fh.write(f"n_trials = {summary.n_trials}\n")
        fh.write(f"baseline_name = {summary.baseline_name}\n")
        fh.write(f"win_rate = {_FLOAT_FMT % summary.win_rate}\n")
        for side, metrics in (
            ("treatment", summary.metrics),
            ("baseline", summary.baseline_metrics),
        ):
            for key in sorted(metrics):
                for stat in ("mean", "median", "std", "min", "max"):
                    fh.write(
                        f"{side}.{key}.{stat} = "
                        f"{_FLOAT_FMT % metrics[key][stat]}\n"
                    )
    with open(path_json, "w", encoding="utf-8") as fh:
        fh.write(summary.to_json() + "\n")


# -- synthetic benchmark ------------------------------------------------------


def make_synthetic_series(
    seed: int, length: int = 2000, n_spikes: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Seasonal sine plus logistic-map noise, optionally with spikes.

    value(t) = 0.8 * sin(2*pi*t / 48) + 0.2 * z(t) where z follows the
    chaotic logistic map z' = 3.9 * z * (1 - z) from a seeded start.
    When n_spikes > 0, that many distinct positions get a +10-sigma jump
    (sigma measured on the clean series); the positions are returned.
    """
    if length < 2:
        raise ValueError(f"length must be >= 2, got {length}")
    if not 0 <= n_spikes <= length:
        raise ValueError(f"n_spikes must be in 0..length, got {n_spikes}")
    rng = np.random.default_rng(seed)
    z = float(rng.uniform(0.2, 0.8))
    values = np.empty(length, dtype=np.float64)
    for t in range(length):
        z = 3.9 * z * (1.0 - z)
        values[t] = 0.8 * math.sin(2.0 * math.pi * t / 48.0) + 0.2 * z
    positions = np.empty(0, dtype=np.int64)
    if n_spikes:
        sigma = float(values.std())
        positions = np.sort(rng.choice(length, size=n_spikes, replace=False))
        values = values.copy()
        values[positions] += 10.0 * sigma
    return values, positions


_SYNTH_EPOCH0 = 1577836800  # 2020-01-01 00:00:00 UTC
_HOUR = 3600


def make_synthetic_frame(seed: int, length: int = 2000, n_spikes: int = 0) -> FeatureFrame:
    """Wrap the synthetic series as a one-feature hourly FeatureFrame."""
    values, _ = make_synthetic_series(seed, length, n_spikes)
    epochs = _SYNTH_EPOCH0 + _HOUR * np.arange(length, dtype=np.int64)
    return FeatureFrame(
        epochs=epochs,
        segment_ids=np.zeros(length, dtype=np.int64),
        data=values[:, None].copy(),
        feature_names=("y",),
        target="y",
        period=_HOUR,
    )


def write_synthetic_ett_csv(path, seed: int, length: int = 2000) -> None:
    """Emit the synthetic benchmark as a well-formed hourly ETT file.

    OT carries the benchmark series; the load columns are smooth
    deterministic transforms of it so every column varies.
    """
    values, _ = make_synthetic_series(seed, length)
    shifted = np.roll(values, 1)
    shifted[0] = values[0]
    cols = {
        "HUFL": 2.0 * values + 1.0,
        "HULL": 0.5 * shifted - 0.2,
        "MUFL": 1.5 * values - 0.4,
        "MULL": 0.7 * shifted + 0.1,
        "LUFL": values * values,
        "LULL": 0.3 * values + 0.05 * shifted,
        "OT": values,
    }
    epochs = _SYNTH_EPOCH0 + _HOUR * np.arange(length, dtype=np.int64)
    from .data import epoch_to_text

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date," + ",".join(cols) + "\n")
        for i, e in enumerate(epochs):
            row = ",".join(_FLOAT_FMT % cols[name][i] for name in cols)
            fh.write(f"{epoch_to_text(int(e))},{row}\n")
