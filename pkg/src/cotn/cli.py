"""Command-line front end.

Subcommands: bifurcate, table, train, eval, forecast, sweep-types,
anomaly. All file output lands inside the --out directory (default the
working directory); nothing else on the filesystem is touched.

Exit codes: 0 on success, 1 for runtime problems (missing or malformed
files, diverging runs), 2 for usage or configuration errors (argparse
reports flag misuse as 2 on its own; bad config files report the
offending key).

Run configuration is an INI file of ``key = value`` pairs under [data],
[model] and [train]; any value can be overridden on the command line
with --set section.key=value.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .activation import build_table, write_table
from .data import (
    CleanConfig,
    Dataset,
    NormStats,
    build_dataset,
    clean,
    denormalize_feature,
    epoch_to_text,
    featurize,
    load_csv,
    write_stats,
)
from .model import (
    ActivationMode,
    Forecaster,
    ModelConfig,
    load_autoencoder,
    load_forecaster,
    save_autoencoder,
    save_forecaster,
)
from .oscillator import bifurcation_sweep, builtin_params, write_bifurcation_csv
from .training import (
    TrainConfig,
    fit_autoencoder,
    mae,
    mse,
    run_training,
    sweep_types,
    write_trial_report,
)

_FLOAT_FMT = "%.17g"


class ConfigError(ValueError):
    """Bad configuration; exits with status 2 and names the key."""


# -- config file --------------------------------------------------------------


def _as_int(section: str, key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected an integer, got {text!r}") from None


def _as_float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected a number, got {text!r}") from None


def _as_bool(section: str, key: str, text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{section}.{key}: expected a boolean, got {text!r}")


_KNOWN_KEYS = {
    "data": {
        "path", "schema", "enc_len", "label_len", "horizon", "stride",
        "train_ratio", "val_ratio", "test_ratio",
        "max_ffill_gap", "z_max", "return_limit",
    },
    "model": {
        "d_model", "n_heads", "n_enc_layers", "n_dec_layers", "d_ff",
        "distill", "activation", "type_id", "lam",
    },
    "train": {
        "epochs", "batch_size", "lr", "lr_schedule", "seed", "patience",
        "w_distill", "plan", "pretrain_epochs", "anomaly_weighting",
        "ae_hidden", "ae_bottleneck", "ae_epochs",
    },
}


def load_run_config(path: str | None, overrides: list[str]) -> dict[str, dict[str, str]]:
    """Read the INI config and apply --set overrides; unknown keys fail."""
    raw: dict[str, dict[str, str]] = {s: {} for s in _KNOWN_KEYS}
    if path is not None:
        if not os.path.exists(path):
            raise FileNotFoundError(f"config file not found: {path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in parser.sections():
            if section not in _KNOWN_KEYS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in parser.items(section):
                if key not in _KNOWN_KEYS[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                raw[section][key] = value
    for item in overrides:
        lhs, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        section, dot, key = lhs.strip().partition(".")
        if not dot or section not in _KNOWN_KEYS:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        if key not in _KNOWN_KEYS[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        raw[section][key] = value.strip()
    return raw


@dataclass
class DataSpec:
    path: str
    schema: str = "ett"
    enc_len: int = 24
    label_len: int = 12
    horizon: int = 8
    stride: int = 1
    train_ratio: float = 0.7
    val_ratio: float = 0.1
    test_ratio: float = 0.2
    max_ffill_gap: int = 3
    z_max: float = 5.0
    return_limit: float = 0.20


def _build_data_spec(raw: dict[str, dict[str, str]]) -> DataSpec:
    sec = raw["data"]
    if "path" not in sec:
        raise ConfigError("data.path is required")
    spec = DataSpec(path=sec["path"])
    for f in fields(DataSpec):
        if f.name in ("path",) or f.name not in sec:
            continue
        text = sec[f.name]
        if f.type == "int":
            setattr(spec, f.name, _as_int("data", f.name, text))
        elif f.type == "float":
            setattr(spec, f.name, _as_float("data", f.name, text))
        else:
            setattr(spec, f.name, text)
    if spec.schema not in ("ett", "ohlcv"):
        raise ConfigError(f"data.schema: expected ett or ohlcv, got {spec.schema!r}")
    return spec


def _build_activation(raw: dict[str, dict[str, str]]) -> ActivationMode:
    sec = raw["model"]
    kind = sec.get("activation", "gated")
    if kind not in ("gelu", "gated"):
        raise ConfigError(f"model.activation: expected gelu or gated, got {kind!r}")
    type_id = _as_int("model", "type_id", sec.get("type_id", "1"))
    if not 1 <= type_id <= 8:
        raise ConfigError(f"model.type_id: expected 1..8, got {type_id}")
    lam = _as_float("model", "lam", sec.get("lam", "0.5"))
    try:
        return ActivationMode(kind=kind, type_id=type_id, lam=lam)
    except ValueError as exc:
        raise ConfigError(f"model.lam: {exc}") from None


def _build_model_cfg(
    raw: dict[str, dict[str, str]], spec: DataSpec, n_features: int
) -> ModelConfig:
    sec = raw["model"]
    mode = _build_activation(raw)
    try:
        return ModelConfig(
            d_model=_as_int("model", "d_model", sec.get("d_model", "16")),
            n_heads=_as_int("model", "n_heads", sec.get("n_heads", "2")),
            n_enc_layers=_as_int("model", "n_enc_layers", sec.get("n_enc_layers", "2")),
            n_dec_layers=_as_int("model", "n_dec_layers", sec.get("n_dec_layers", "1")),
            d_ff=_as_int("model", "d_ff", sec.get("d_ff", "32")),
            enc_len=spec.enc_len,
            label_len=spec.label_len,
            horizon=spec.horizon,
            n_features=n_features,
            n_targets=1,
            distill=_as_bool("model", "distill", sec.get("distill", "true")),
            activation=mode,
        )
    except ValueError as exc:
        raise ConfigError(f"model configuration invalid: {exc}") from None


def _build_train_cfg(raw: dict[str, dict[str, str]], mode: ActivationMode,
                     seed_override: int | None) -> TrainConfig:
    sec = raw["train"]
    kwargs = {}
    for key in ("epochs", "batch_size", "seed", "patience", "pretrain_epochs",
                "ae_hidden", "ae_bottleneck", "ae_epochs"):
        if key in sec:
            kwargs[key] = _as_int("train", key, sec[key])
    for key in ("lr", "w_distill"):
        if key in sec:
            kwargs[key] = _as_float("train", key, sec[key])
    if "lr_schedule" in sec:
        kwargs["lr_schedule"] = sec["lr_schedule"]
    if "plan" in sec:
        kwargs["plan"] = sec["plan"]
    if "anomaly_weighting" in sec:
        kwargs["anomaly_weighting"] = _as_bool(
            "train", "anomaly_weighting", sec["anomaly_weighting"]
        )
    if seed_override is not None:
        kwargs["seed"] = seed_override
    try:
        return TrainConfig(activation=mode, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"train configuration invalid: {exc}") from None


# -- shared plumbing -----------------------------------------------------------


def _vlog(args, message: str) -> None:
    if args.verbose:
        print(message, file=sys.stderr)


def _out_dir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _parse_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"--range expects lo:hi, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(f"--range expects numbers, got {text!r}") from None
    if not lo < hi:
        raise ConfigError(f"--range expects lo < hi, got {text!r}")
    return lo, hi


def _prepare_dataset(spec: DataSpec, args):
    _vlog(args, f"loading {spec.path} ({spec.schema})")
    raw = load_csv(spec.path, spec.schema)
    cleaned = clean(
        raw,
        CleanConfig(
            max_ffill_gap=spec.max_ffill_gap,
            z_max=spec.z_max,
            return_limit=spec.return_limit,
        ),
    )
    frame = featurize(cleaned)
    _vlog(args, f"{cleaned.n_rows} rows, {frame.n_features} features, "
                f"{len(cleaned.report)} cleaning actions")
    dataset = build_dataset(
        frame,
        enc_len=spec.enc_len,
        label_len=spec.label_len,
        horizon=spec.horizon,
        stride=spec.stride,
        ratios=(spec.train_ratio, spec.val_ratio, spec.test_ratio),
    )
    return dataset, cleaned


def _dataset_meta(spec: DataSpec, dataset: Dataset) -> dict[str, str]:
    return {
        "data.schema": spec.schema,
        "data.stride": str(spec.stride),
        "data.train_ratio": repr(spec.train_ratio),
        "data.val_ratio": repr(spec.val_ratio),
        "data.test_ratio": repr(spec.test_ratio),
        "data.max_ffill_gap": str(spec.max_ffill_gap),
        "data.z_max": repr(spec.z_max),
        "data.return_limit": repr(spec.return_limit),
        "data.target": dataset.frame.target,
        "norm.names": ",".join(dataset.stats.names),
        "norm.dropped": ",".join(dataset.stats.dropped),
    }


def _spec_from_meta(meta: dict[str, str], cfg: ModelConfig, path: str) -> DataSpec:
    return DataSpec(
        path=path,
        schema=meta["data.schema"],
        enc_len=cfg.enc_len,
        label_len=cfg.label_len,
        horizon=cfg.horizon,
        stride=int(meta["data.stride"]),
        train_ratio=float(meta["data.train_ratio"]),
        val_ratio=float(meta["data.val_ratio"]),
        test_ratio=float(meta["data.test_ratio"]),
        max_ffill_gap=int(meta["data.max_ffill_gap"]),
        z_max=float(meta["data.z_max"]),
        return_limit=float(meta["data.return_limit"]),
    )


def _stats_from_extra(extra: dict[str, np.ndarray], meta: dict[str, str]) -> NormStats:
    names = tuple(n for n in meta["norm.names"].split(",") if n)
    dropped = tuple(n for n in meta["norm.dropped"].split(",") if n)
    return NormStats(names, extra["norm.mean"], extra["norm.std"], dropped)


# -- subcommands ----------------------------------------------------------------


def cmd_bifurcate(args) -> int:
    if not 1 <= args.type <= 8:
        raise ConfigError(f"--type: expected 1..8, got {args.type}")
    lo, hi = _parse_range(args.range)
    if args.keep > args.steps:
        raise ConfigError(f"--keep ({args.keep}) cannot exceed --steps ({args.steps})")
    data = bifurcation_sweep(
        builtin_params(args.type), lo, hi,
        n_x=args.n, n_steps=args.steps, keep_last=args.keep,
    )
    path = os.path.join(_out_dir(args), f"bifurcation_type{args.type}.csv")
    write_bifurcation_csv(data, path)
    print(path)
    return 0


def cmd_table(args) -> int:
    if not 1 <= args.type <= 8:
        raise ConfigError(f"--type: expected 1..8, got {args.type}")
    if args.nodes < 2:
        raise ConfigError(f"--nodes must be >= 2, got {args.nodes}")
    lo, hi = _parse_range(args.range)
    tab = build_table(
        builtin_params(args.type), lo, hi, args.nodes, type_id=args.type
    )
    path = os.path.join(_out_dir(args), f"activation_table_type{args.type}.txt")
    write_table(tab, path)
    print(path)
    return 0


def cmd_train(args) -> int:
    raw = load_run_config(args.config, args.set or [])
    spec = _build_data_spec(raw)
    dataset, cleaned = _prepare_dataset(spec, args)
    mode = _build_activation(raw)
    model_cfg = _build_model_cfg(raw, spec, dataset.frame.n_features)
    train_cfg = _build_train_cfg(raw, mode, args.seed)
    _vlog(args, f"training plan={train_cfg.plan} activation={mode.kind} "
                f"seed={train_cfg.seed}")
    model, report = run_training(dataset, model_cfg, train_cfg)
    out = _out_dir(args)
    ckpt = os.path.join(out, "checkpoint.bin")
    save_forecaster(
        ckpt, model,
        extra_tensors={"norm.mean": dataset.stats.mean, "norm.std": dataset.stats.std},
        extra_meta=_dataset_meta(spec, dataset),
    )
    write_stats(os.path.join(out, "norm_stats.txt"), dataset.stats)
    write_trial_report(os.path.join(out, "report.txt"), report)
    with open(os.path.join(out, "cleaning_report.txt"), "w", encoding="utf-8") as fh:
        for action in cleaned.report:
            fh.write(action.render() + "\n")
    if train_cfg.anomaly_weighting:
        ae = fit_autoencoder(
            dataset.splits.train.enc,
            hidden=train_cfg.ae_hidden,
            bottleneck=train_cfg.ae_bottleneck,
            seed=train_cfg.seed,
            epochs=train_cfg.ae_epochs,
        )
        save_autoencoder(os.path.join(out, "autoencoder.bin"), ae)
    print(ckpt)
    print(f"test_mae = {_FLOAT_FMT % report.test_mae}")
    print(f"test_mse = {_FLOAT_FMT % report.test_mse}")
    return 0


def _restore(args):
    model, extra, meta = load_forecaster(args.checkpoint)
    stats = _stats_from_extra(extra, meta)
    spec = _spec_from_meta(meta, model.cfg, args.data)
    dataset, _ = _prepare_dataset(spec, args)
    if tuple(dataset.stats.names) != stats.names:
        raise RuntimeError(
            "feature set of the data does not match the checkpoint "
            f"({dataset.stats.names} vs {stats.names})"
        )
    # Use the checkpoint's statistics, not fresh ones, so scoring matches
    # the training run exactly.
    from .data import normalize, window

    frame = normalize(
        featurize(clean(load_csv(spec.path, spec.schema), CleanConfig(
            max_ffill_gap=spec.max_ffill_gap, z_max=spec.z_max,
            return_limit=spec.return_limit))),
        stats,
    )
    splits = window(
        frame, spec.enc_len, spec.label_len, spec.horizon, spec.stride,
        (spec.train_ratio, spec.val_ratio, spec.test_ratio),
    )
    return model, stats, frame, splits


def cmd_eval(args) -> int:
    model, stats, frame, splits = _restore(args)
    target = frame.target
    for name in ("train", "val", "test"):
        batch = getattr(splits, name)
        if batch.n_windows == 0:
            print(f"{name}_mae = nan")
            print(f"{name}_mse = nan")
            continue
        parts = []
        for lo in range(0, batch.n_windows, 512):
            parts.append(model.predict(batch.enc[lo:lo + 512], batch.dec[lo:lo + 512]))
        pred = np.concatenate(parts, axis=0)
        p = denormalize_feature(pred, stats, target)
        t = denormalize_feature(batch.tgt, stats, target)
        print(f"{name}_mae = {_FLOAT_FMT % mae(p, t)}")
        print(f"{name}_mse = {_FLOAT_FMT % mse(p, t)}")
    return 0


def cmd_forecast(args) -> int:
    model, stats, frame, _ = _restore(args)
    cfg = model.cfg
    if args.horizon is not None and args.horizon != cfg.horizon:
        raise ConfigError(
            f"--horizon {args.horizon} does not match the checkpoint's "
            f"fixed horizon {cfg.horizon}"
        )
    n = frame.n_rows
    if n < cfg.enc_len:
        raise RuntimeError(
            f"need at least {cfg.enc_len} feature rows to forecast, have {n}"
        )
    tail = slice(n - cfg.enc_len, n)
    if not np.all(frame.segment_ids[tail] == frame.segment_ids[n - 1]):
        raise RuntimeError(
            "the final window straddles a data gap; cannot forecast from it"
        )
    enc = frame.data[tail][None]
    known = frame.data[n - cfg.label_len : n]
    dec = np.concatenate(
        [known, np.zeros((cfg.horizon, frame.n_features))], axis=0
    )[None]
    pred = model.predict(enc, dec)[0, :, 0]
    values = denormalize_feature(pred, stats, frame.target)
    path = os.path.join(_out_dir(args), "forecast.csv")
    last_epoch = int(frame.epochs[n - 1])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("timestamp,forecast\n")
        for h, v in enumerate(values, start=1):
            fh.write(
                f"{epoch_to_text(last_epoch + h * frame.period)},"
                f"{_FLOAT_FMT % v}\n"
            )
    print(path)
    return 0


def cmd_sweep_types(args) -> int:
    raw = load_run_config(args.config, args.set or [])
    spec = _build_data_spec(raw)
    dataset, _ = _prepare_dataset(spec, args)
    mode = _build_activation(raw)
    model_cfg = _build_model_cfg(raw, spec, dataset.frame.n_features)
    train_cfg = _build_train_cfg(raw, mode, args.seed)
    result = sweep_types(dataset, model_cfg, train_cfg, jobs=args.jobs)
    path = os.path.join(_out_dir(args), "sweep.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rank,type_id,val_mae,test_mae\n")
        for rank, entry in enumerate(result.entries, start=1):
            fh.write(
                f"{rank},{entry.type_id},{_FLOAT_FMT % entry.val_mae},"
                f"{_FLOAT_FMT % entry.report.test_mae}\n"
            )
    print(path)
    print(f"winner = type {result.winner}")
    return 0


def cmd_anomaly(args) -> int:
    ae = load_autoencoder(args.ae)
    stats_path = args.stats or os.path.join(
        os.path.dirname(os.path.abspath(args.ae)), "norm_stats.txt"
    )
    from .data import normalize, read_stats

    stats = read_stats(stats_path)
    raw = load_csv(args.data, args.schema)
    frame = normalize(featurize(clean(raw)), stats)
    if frame.n_features != ae.n_features:
        raise RuntimeError(
            f"data has {frame.n_features} features but the autoencoder "
            f"expects {ae.n_features}"
        )
    length = ae.window_len
    n_windows = frame.n_rows // length
    if n_windows == 0:
        raise RuntimeError(
            f"need at least {length} rows to score, have {frame.n_rows}"
        )
    path = os.path.join(_out_dir(args), "anomaly.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("window,timestamp,step_error,window_weight\n")
        for w in range(n_windows):
            rows = slice(w * length, (w + 1) * length)
            win = frame.data[rows]
            errs = ae.step_errors(win[None])[0]
            weight = float(1.0 / (1.0 + errs.max() / ae.tau))
            for offset, err in enumerate(errs):
                epoch = int(frame.epochs[w * length + offset])
                fh.write(
                    f"{w},{epoch_to_text(epoch)},{_FLOAT_FMT % err},"
                    f"{_FLOAT_FMT % weight}\n"
                )
    print(path)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration file")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--jobs", type=int, default=1,
                        help="parallel workers where supported")
    common.add_argument("--verbose", action="store_true",
                        help="progress chatter on stderr")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")

    parser = argparse.ArgumentParser(
        prog="cotn",
        description="Chaotic-oscillator activations and a toy transformer "
                    "forecaster for volatile time series.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bifurcate", parents=[common],
                       help="sweep a stimulus grid and dump settled outputs")
    p.add_argument("--type", type=int, default=1, help="oscillator type 1..8")
    p.add_argument("--range", default="-1:1", help="stimulus range lo:hi")
    p.add_argument("--n", type=int, default=401, help="grid points")
    p.add_argument("--steps", type=int, default=300, help="steps per point")
    p.add_argument("--keep", type=int, default=100, help="retained tail values")
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("table", parents=[common],
                       help="tabulate a max-over-time activation")
    p.add_argument("--type", type=int, default=1, help="oscillator type 1..8")
    p.add_argument("--range", default="-4:4", help="tabulated range lo:hi")
    p.add_argument("--nodes", type=int, default=4001, help="grid nodes")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("train", parents=[common],
                       help="train a forecaster per the config file")
    p.set_defaults(func=cmd_train, needs_config=True)

    p = sub.add_parser("eval", parents=[common],
                       help="score a checkpoint against a data file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("forecast", parents=[common],
                       help="forecast past the end of a data file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--horizon", type=int,
                   help="must match the checkpoint's horizon")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("sweep-types", parents=[common],
                       help="train all oscillator types, rank by val MAE")
    p.set_defaults(func=cmd_sweep_types, needs_config=True)

    p = sub.add_parser("anomaly", parents=[common],
                       help="per-step reconstruction errors for a data file")
    p.add_argument("--data", required=True)
    p.add_argument("--ae", required=True, help="autoencoder checkpoint")
    p.add_argument("--stats", help="normalization stats file "
                                   "(default: next to the checkpoint)")
    p.add_argument("--schema", default="ett", choices=("ett", "ohlcv"))
    p.set_defaults(func=cmd_anomaly)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "needs_config", False) and not args.config:
        print("error: --config is required for this command", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
