"""Small encoder-decoder forecaster with pluggable scalar activations.

The encoder is a stack of post-norm self-attention blocks; when
distillation is on, a depthwise convolution (kernel 3, zero same-padding)
followed by GELU and a stride-2 max-pool halves the time axis between
blocks, so k pooling stages leave ceil(L / 2^k) encoder rows. Each
pooling stage also contributes a consistency loss between its input and
the pooled output re-expanded by nearest-neighbor repetition.

Decoding is parallel: the decoder consumes the last label_len known rows
plus horizon zero placeholder rows in one causally masked pass and the
head reads the forecast off the placeholder positions, so exactly one
decoder invocation produces the whole horizon.

A separate dense autoencoder scores windows by reconstruction error; its
per-window weight softly strips anomalous samples from the training
objective instead of deleting them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import tensor as te
from .activation import (
    GateConfig,
    GatedLeeActivation,
    GeluActivation,
    table_for_type,
)
from .tensor import Tensor

__all__ = [
    "ActivationMode",
    "ModelConfig",
    "AnomalyScore",
    "sinusoidal_position_encoding",
    "causal_mask",
    "multi_head_attention",
    "distill_layer",
    "distill_loss",
    "Forecaster",
    "Autoencoder",
    "anomaly_score",
    "save_forecaster",
    "load_forecaster",
    "save_autoencoder",
    "load_autoencoder",
]


@dataclass(frozen=True)
class ActivationMode:
    """Which scalar nonlinearity the feed-forward blocks use.

    kind "gelu" ignores the other fields; kind "gated" blends GELU with
    the tabulated oscillator activation of the given type through the
    fixed weight lam.
    """

    kind: str = "gelu"
    type_id: int = 1
    lam: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in ("gelu", "gated"):
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")

    def build(self):
        if self.kind == "gelu":
            return GeluActivation()
        tab = table_for_type(self.type_id)
        return GatedLeeActivation(GateConfig(self.lam, self.type_id), tab)


@dataclass(frozen=True)
class ModelConfig:
    """Static architecture description of one forecaster."""

    d_model: int = 16
    n_heads: int = 2
    n_enc_layers: int = 2
    n_dec_layers: int = 1
    d_ff: int = 32
    enc_len: int = 24
    label_len: int = 12
    horizon: int = 8
    n_features: int = 1
    n_targets: int = 1
    distill: bool = True
    activation: ActivationMode = field(default_factory=ActivationMode)

    def __post_init__(self) -> None:
        if self.d_model < 1 or self.d_model % self.n_heads != 0:
            raise ValueError(
                f"d_model ({self.d_model}) must be a positive multiple of "
                f"n_heads ({self.n_heads})"
            )
        for name in ("n_enc_layers", "n_dec_layers", "d_ff", "enc_len",
                     "label_len", "horizon", "n_features", "n_targets"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.label_len > self.enc_len:
            raise ValueError(
                f"label_len ({self.label_len}) cannot exceed enc_len ({self.enc_len})"
            )
        if self.distill and self.enc_len < 2 ** (self.n_enc_layers - 1):
            raise ValueError(
                f"enc_len ({self.enc_len}) too short for {self.n_enc_layers - 1} "
                f"pooling stages; need >= {2 ** (self.n_enc_layers - 1)}"
            )


@dataclass(frozen=True)
class AnomalyScore:
    """Per-step reconstruction errors of one window and its sample weight."""

    step_errors: np.ndarray
    weight: float


def sinusoidal_position_encoding(length: int, d_model: int) -> np.ndarray:
    """Classic sin/cos position table, shape (length, d_model)."""
    pos = np.arange(length, dtype=np.float64)[:, None]
    idx = np.arange(d_model, dtype=np.float64)[None, :]
    angles = pos / np.power(10000.0, (2.0 * np.floor(idx / 2.0)) / d_model)
    pe = np.empty((length, d_model), dtype=np.float64)
    pe[:, 0::2] = np.sin(angles[:, 0::2])
    pe[:, 1::2] = np.cos(angles[:, 1::2])
    return pe


def causal_mask(length: int) -> np.ndarray:
    """Additive mask: position i may attend to j <= i only."""
    mask = np.zeros((length, length), dtype=np.float64)
    mask[np.triu_indices(length, k=1)] = te.NEG_INF
    return mask


def multi_head_attention(
    q: Tensor,
    k: Tensor,
    v: Tensor,
    n_heads: int,
    wq: Tensor,
    wk: Tensor,
    wv: Tensor,
    wo: Tensor,
    mask: Optional[np.ndarray] = None,
) -> Tensor:
    """Scaled dot-product attention over n_heads column blocks.

    q has shape (..., Lq, d), k and v (..., Lk, d); all four projection
    matrices are (d, d). The optional additive mask broadcasts against
    the (..., Lq, Lk) score array.
    """
    d = q.shape[-1]
    if d % n_heads != 0:
        raise ValueError(f"model width {d} not divisible by n_heads {n_heads}")
    if k.shape[-1] != d or v.shape[-1] != d:
        raise ValueError(
            f"q/k/v widths disagree: {q.shape}, {k.shape}, {v.shape}"
        )
    if k.shape[-2] != v.shape[-2]:
        raise ValueError(
            f"k and v must share their time length: {k.shape} vs {v.shape}"
        )
    for name, w in (("wq", wq), ("wk", wk), ("wv", wv), ("wo", wo)):
        if w.shape != (d, d):
            raise ValueError(f"{name} must be ({d}, {d}), got {w.shape}")
    dh = d // n_heads
    scale = 1.0 / math.sqrt(dh)
    qp = te.matmul(q, wq)
    kp = te.matmul(k, wk)
    vp = te.matmul(v, wv)
    heads = []
    for h in range(n_heads):
        lo, hi = h * dh, (h + 1) * dh
        qh = te.slice_last(qp, lo, hi)
        kh = te.slice_last(kp, lo, hi)
        vh = te.slice_last(vp, lo, hi)
        scores = te.scale(te.matmul(qh, te.transpose_last2(kh)), scale)
        attn = te.softmax_last_axis(scores, mask)
        heads.append(te.matmul(attn, vh))
    merged = heads[0] if n_heads == 1 else te.concat_last(heads)
    return te.matmul(merged, wo)


def distill_layer(
    h: Tensor,
    w_prev: Tensor,
    w_cur: Tensor,
    w_next: Tensor,
    bias: Tensor,
    gelu=None,
) -> Tensor:
    """Depthwise conv (kernel 3, zero same-padding) + GELU + stride-2 pool.

    Each channel c mixes rows t-1, t, t+1 with its own three taps; the
    output keeps the channel count and has ceil(L / 2) rows.
    """
    length = h.shape[-2]
    if length < 2:
        raise ValueError(f"distill needs time length >= 2, got {length}")
    gelu = gelu or GeluActivation()
    mixed = te.add(
        te.add(te.mul(te.shift_time(h, 1), w_prev), te.mul(h, w_cur)),
        te.add(te.mul(te.shift_time(h, -1), w_next), bias),
    )
    return te.maxpool_time2(te.apply_activation(mixed, gelu))


def distill_loss(x: Tensor, x_hat: Tensor) -> Tensor:
    """Mean squared gap between a representation and its pooled copy.

    x_hat may already have x's time length, or the pooled length
    ceil(L / 2), in which case it is re-expanded by nearest-neighbor
    repetition before comparing.
    """
    if x.shape[:-2] != x_hat.shape[:-2] or x.shape[-1] != x_hat.shape[-1]:
        raise ValueError(f"incompatible shapes {x.shape} vs {x_hat.shape}")
    lx, lh = x.shape[-2], x_hat.shape[-2]
    if lh == lx:
        expanded = x_hat
    elif lh == (lx + 1) // 2:
        expanded = te.repeat_time2(x_hat, lx)
    else:
        raise ValueError(
            f"x_hat time length {lh} is neither {lx} nor ceil({lx}/2)"
        )
    diff = te.sub(x, expanded)
    return te.mean_all(te.mul(diff, diff))


def _attn_param_names(prefix: str) -> tuple[str, str, str, str]:
    return (f"{prefix}.wq", f"{prefix}.wk", f"{prefix}.wv", f"{prefix}.wo")


class Forecaster:
    """Encoder-decoder forecaster over fixed-length windows.

    Parameters live in a flat name -> Tensor dict so checkpoints, the
    optimizer and gradient checks can all walk them uniformly. The
    feed-forward nonlinearity is a handle that can be swapped in place
    (warm starting) without touching any parameter.
    """

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        self.cfg = cfg
        self.params: dict[str, Tensor] = {}
        self.activation = cfg.activation.build()
        self.decode_calls = 0
        rng = np.random.default_rng(seed)
        self._build(rng)
        self._enc_pe = sinusoidal_position_encoding(cfg.enc_len, cfg.d_model)
        dec_len = cfg.label_len + cfg.horizon
        self._dec_pe = sinusoidal_position_encoding(dec_len, cfg.d_model)
        self._dec_mask = causal_mask(dec_len)

    # -- construction ---------------------------------------------------

    def _add(self, name: str, data: np.ndarray) -> None:
        self.params[name] = te.parameter(data, name=name)

    def _add_linear(self, rng, name: str, fan_in: int, fan_out: int) -> None:
        self._add(f"{name}.w", te.glorot_uniform(rng, fan_in, fan_out, (fan_in, fan_out)))
        self._add(f"{name}.b", np.zeros(fan_out))

    def _add_attn(self, rng, prefix: str) -> None:
        d = self.cfg.d_model
        for name in _attn_param_names(prefix):
            self._add(name, te.glorot_uniform(rng, d, d, (d, d)))

    def _add_norm(self, prefix: str) -> None:
        d = self.cfg.d_model
        self._add(f"{prefix}.gamma", np.ones(d))
        self._add(f"{prefix}.beta", np.zeros(d))

    def _build(self, rng: np.random.Generator) -> None:
        cfg = self.cfg
        d = cfg.d_model
        self._add_linear(rng, "enc.embed", cfg.n_features, d)
        self._add_linear(rng, "dec.embed", cfg.n_features, d)
        for l in range(cfg.n_enc_layers):
            self._add_attn(rng, f"enc.{l}.attn")
            self._add_norm(f"enc.{l}.ln1")
            self._add_linear(rng, f"enc.{l}.ff1", d, cfg.d_ff)
            self._add_linear(rng, f"enc.{l}.ff2", cfg.d_ff, d)
            self._add_norm(f"enc.{l}.ln2")
            if cfg.distill and l < cfg.n_enc_layers - 1:
                for tap in ("prev", "cur", "next"):
                    self._add(f"enc.{l}.pool.w_{tap}",
                              te.glorot_uniform(rng, 3, 3, (d,)))
                self._add(f"enc.{l}.pool.b", np.zeros(d))
        for l in range(cfg.n_dec_layers):
            self._add_attn(rng, f"dec.{l}.self")
            self._add_norm(f"dec.{l}.ln1")
            self._add_attn(rng, f"dec.{l}.cross")
            self._add_norm(f"dec.{l}.ln2")
            self._add_linear(rng, f"dec.{l}.ff1", d, cfg.d_ff)
            self._add_linear(rng, f"dec.{l}.ff2", cfg.d_ff, d)
            self._add_norm(f"dec.{l}.ln3")
        self._add_linear(rng, "head", d, cfg.n_targets)

    # -- parameter plumbing ----------------------------------------------

    def set_activation(self, mode: ActivationMode) -> None:
        """Swap the feed-forward nonlinearity; parameters are untouched."""
        self.cfg = replace(self.cfg, activation=mode)
        self.activation = mode.build()

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        missing = set(self.params) - set(arrays)
        extra = set(arrays) - set(self.params)
        if missing or extra:
            raise ValueError(
                f"parameter names disagree (missing {sorted(missing)}, "
                f"unexpected {sorted(extra)})"
            )
        for name, p in self.params.items():
            arr = np.asarray(arrays[name], dtype=np.float64)
            if arr.shape != p.data.shape:
                raise ValueError(
                    f"{name}: shape {arr.shape} does not match {p.data.shape}"
                )
            p.data = arr.copy()

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    # -- forward pieces ---------------------------------------------------

    def _p(self, name: str) -> Tensor:
        return self.params[name]

    def _ffn(self, x: Tensor, prefix: str) -> Tensor:
        h = te.add(te.matmul(x, self._p(f"{prefix}.ff1.w")), self._p(f"{prefix}.ff1.b"))
        h = te.apply_activation(h, self.activation)
        return te.add(te.matmul(h, self._p(f"{prefix}.ff2.w")), self._p(f"{prefix}.ff2.b"))

    def _norm(self, x: Tensor, prefix: str) -> Tensor:
        return te.layer_norm(x, self._p(f"{prefix}.gamma"), self._p(f"{prefix}.beta"))

    def _attend(self, q: Tensor, kv: Tensor, prefix: str,
                mask: Optional[np.ndarray] = None) -> Tensor:
        names = _attn_param_names(prefix)
        return multi_head_attention(
            q, kv, kv, self.cfg.n_heads,
            *(self._p(n) for n in names), mask=mask,
        )

    def _embed(self, x: np.ndarray, prefix: str, pe: np.ndarray) -> Tensor:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3 or x.shape[-1] != self.cfg.n_features:
            raise ValueError(
                f"expected (batch, time, {self.cfg.n_features}) input, got {x.shape}"
            )
        emb = te.add(
            te.matmul(te.constant(x), self._p(f"{prefix}.w")),
            self._p(f"{prefix}.b"),
        )
        return te.add(emb, te.constant(pe[: x.shape[1]]))

    def encode(self, enc_x: np.ndarray) -> tuple[Tensor, list[tuple[Tensor, Tensor]]]:
        """Run the encoder stack over (batch, enc_len, n_features) input.

        Returns the final memory and one (input, pooled) pair per
        distillation stage for the consistency loss.
        """
        cfg = self.cfg
        if enc_x.shape[1] != cfg.enc_len:
            raise ValueError(
                f"encoder input length {enc_x.shape[1]} != enc_len {cfg.enc_len}"
            )
        h = self._embed(enc_x, "enc.embed", self._enc_pe)
        pairs: list[tuple[Tensor, Tensor]] = []
        for l in range(cfg.n_enc_layers):
            attn = self._attend(h, h, f"enc.{l}.attn")
            h = self._norm(te.add(h, attn), f"enc.{l}.ln1")
            h = self._norm(te.add(h, self._ffn(h, f"enc.{l}")), f"enc.{l}.ln2")
            if cfg.distill and l < cfg.n_enc_layers - 1:
                pooled = distill_layer(
                    h,
                    self._p(f"enc.{l}.pool.w_prev"),
                    self._p(f"enc.{l}.pool.w_cur"),
                    self._p(f"enc.{l}.pool.w_next"),
                    self._p(f"enc.{l}.pool.b"),
                )
                pairs.append((h, pooled))
                h = pooled
        return h, pairs

    def parallel_decode(
        self,
        memory: Tensor,
        dec_x: np.ndarray,
        capture: Optional[dict] = None,
    ) -> Tensor:
        """One causally masked decoder pass over context plus placeholders.

        dec_x must carry label_len known rows followed by horizon rows of
        zeros; the returned tensor holds the head output at the horizon
        positions, shape (batch, horizon, n_targets).
        """
        cfg = self.cfg
        dec_x = np.asarray(dec_x, dtype=np.float64)
        want = cfg.label_len + cfg.horizon
        if dec_x.ndim != 3 or dec_x.shape[1] != want:
            raise ValueError(
                f"decoder input must be (batch, {want}, {cfg.n_features}), "
                f"got {dec_x.shape}"
            )
        if np.any(dec_x[:, cfg.label_len :, :] != 0.0):
            raise ValueError(
                f"the last {cfg.horizon} decoder rows are forecast placeholders "
                "and must be zero"
            )
        self.decode_calls += 1
        h = self._embed(dec_x, "dec.embed", self._dec_pe)
        for l in range(cfg.n_dec_layers):
            self_attn = self._attend(h, h, f"dec.{l}.self", mask=self._dec_mask)
            h = self._norm(te.add(h, self_attn), f"dec.{l}.ln1")
            if capture is not None and l == 0:
                capture["self_attn_0"] = h.data.copy()
            cross = self._attend(h, memory, f"dec.{l}.cross")
            h = self._norm(te.add(h, cross), f"dec.{l}.ln2")
            h = self._norm(te.add(h, self._ffn(h, f"dec.{l}")), f"dec.{l}.ln3")
        out = te.add(te.matmul(h, self._p("head.w")), self._p("head.b"))
        return te.slice_time(out, cfg.label_len, want)

    def forward(
        self, enc_x: np.ndarray, dec_x: np.ndarray
    ) -> tuple[Tensor, list[tuple[Tensor, Tensor]]]:
        """Forecast plus the distillation pairs feeding the training loss."""
        memory, pairs = self.encode(enc_x)
        return self.parallel_decode(memory, dec_x), pairs

    def predict(self, enc_x: np.ndarray, dec_x: np.ndarray) -> np.ndarray:
        """Forecast as a plain array, shape (batch, horizon, n_targets)."""
        pred, _ = self.forward(enc_x, dec_x)
        return pred.data.copy()


# -- anomaly scoring ------------------------------------------------------


class Autoencoder:
    """Two-layer dense encoder/decoder over flattened windows.

    Scores a window by its per-step squared reconstruction error; after
    fitting, tau holds the 95th-percentile step error of the training
    split and weights fall as errors rise above it.
    """

    def __init__(self, window_len: int, n_features: int,
                 hidden: int = 32, bottleneck: int = 8, seed: int = 0):
        if min(window_len, n_features, hidden, bottleneck) < 1:
            raise ValueError("all autoencoder dimensions must be >= 1")
        self.window_len = window_len
        self.n_features = n_features
        self.hidden = hidden
        self.bottleneck = bottleneck
        self.tau: Optional[float] = None
        self._act = GeluActivation()
        flat = window_len * n_features
        rng = np.random.default_rng(seed)
        self.params: dict[str, Tensor] = {}
        for name, fi, fo in (
            ("enc1", flat, hidden),
            ("enc2", hidden, bottleneck),
            ("dec1", bottleneck, hidden),
            ("dec2", hidden, flat),
        ):
            self.params[f"{name}.w"] = te.parameter(
                te.glorot_uniform(rng, fi, fo, (fi, fo)), name=f"{name}.w")
            self.params[f"{name}.b"] = te.parameter(np.zeros(fo), name=f"{name}.b")

    def _flatten(self, windows: np.ndarray) -> np.ndarray:
        w = np.asarray(windows, dtype=np.float64)
        if w.ndim == 2:
            w = w[None]
        if w.ndim != 3 or w.shape[1] != self.window_len or w.shape[2] != self.n_features:
            raise ValueError(
                f"expected (n, {self.window_len}, {self.n_features}) windows, "
                f"got {np.asarray(windows).shape}"
            )
        return w.reshape(w.shape[0], -1)

    def reconstruct(self, flat: Tensor) -> Tensor:
        p = self.params
        h = te.apply_activation(
            te.add(te.matmul(flat, p["enc1.w"]), p["enc1.b"]), self._act)
        z = te.add(te.matmul(h, p["enc2.w"]), p["enc2.b"])
        h = te.apply_activation(
            te.add(te.matmul(z, p["dec1.w"]), p["dec1.b"]), self._act)
        return te.add(te.matmul(h, p["dec2.w"]), p["dec2.b"])

    def step_errors(self, windows: np.ndarray) -> np.ndarray:
        """Per-step squared reconstruction error, shape (n, window_len).

        Each step's error is the mean over features of the squared
        difference between the window and its reconstruction.
        """
        flat = self._flatten(windows)
        recon = self.reconstruct(te.constant(flat)).data
        sq = (flat - recon) ** 2
        return sq.reshape(-1, self.window_len, self.n_features).mean(axis=2)

    def fit_threshold(self, train_windows: np.ndarray) -> float:
        """Set tau to the 95th percentile of training-split step errors."""
        errs = self.step_errors(train_windows)
        self.tau = float(np.percentile(errs, 95.0))
        if self.tau <= 0.0:
            # Degenerate (perfect reconstruction); keep weights defined.
            self.tau = np.finfo(np.float64).tiny
        return self.tau

    def weights(self, windows: np.ndarray) -> np.ndarray:
        """Sample weights 1 / (1 + max_step_error / tau), in (0, 1]."""
        if self.tau is None:
            raise RuntimeError("autoencoder threshold not fitted; call fit_threshold")
        errs = self.step_errors(windows)
        return 1.0 / (1.0 + errs.max(axis=1) / self.tau)


def anomaly_score(window: np.ndarray, ae: Autoencoder) -> AnomalyScore:
    """Score one (window_len, n_features) window with a fitted autoencoder."""
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError(f"expected a single 2-d window, got shape {w.shape}")
    if ae.tau is None:
        raise RuntimeError("autoencoder threshold not fitted; call fit_threshold")
    errs = ae.step_errors(w[None])[0]
    weight = float(1.0 / (1.0 + errs.max() / ae.tau))
    return AnomalyScore(step_errors=errs, weight=weight)


# -- checkpoints -----------------------------------------------------------


def _mode_meta(mode: ActivationMode) -> dict[str, str]:
    return {
        "activation.kind": mode.kind,
        "activation.type_id": str(mode.type_id),
        "activation.lam": repr(mode.lam),
    }


def _mode_from_meta(meta: dict[str, str]) -> ActivationMode:
    return ActivationMode(
        kind=meta["activation.kind"],
        type_id=int(meta["activation.type_id"]),
        lam=float(meta["activation.lam"]),
    )


def save_forecaster(
    path,
    model: Forecaster,
    extra_tensors: Optional[dict[str, np.ndarray]] = None,
    extra_meta: Optional[dict[str, str]] = None,
) -> None:
    """Write parameters plus the full config as one checkpoint file.

    extra_tensors are stored under an ``x.`` prefix so they can never
    collide with model parameters.
    """
    cfg = model.cfg
    meta = {
        "kind": "forecaster",
        "d_model": str(cfg.d_model),
        "n_heads": str(cfg.n_heads),
        "n_enc_layers": str(cfg.n_enc_layers),
        "n_dec_layers": str(cfg.n_dec_layers),
        "d_ff": str(cfg.d_ff),
        "enc_len": str(cfg.enc_len),
        "label_len": str(cfg.label_len),
        "horizon": str(cfg.horizon),
        "n_features": str(cfg.n_features),
        "n_targets": str(cfg.n_targets),
        "distill": str(int(cfg.distill)),
    }
    meta.update(_mode_meta(cfg.activation))
    meta.update(extra_meta or {})
    tensors = {name: p.data for name, p in model.params.items()}
    for name, arr in (extra_tensors or {}).items():
        tensors[f"x.{name}"] = np.asarray(arr, dtype=np.float64)
    te.save_tensors(path, tensors, meta)


def load_forecaster(path) -> tuple[Forecaster, dict[str, np.ndarray], dict[str, str]]:
    """Rebuild a forecaster from a checkpoint written by save_forecaster."""
    tensors, meta = te.load_tensors(path)
    if meta.get("kind") != "forecaster":
        raise ValueError(f"{path}: not a forecaster checkpoint")
    cfg = ModelConfig(
        d_model=int(meta["d_model"]),
        n_heads=int(meta["n_heads"]),
        n_enc_layers=int(meta["n_enc_layers"]),
        n_dec_layers=int(meta["n_dec_layers"]),
        d_ff=int(meta["d_ff"]),
        enc_len=int(meta["enc_len"]),
        label_len=int(meta["label_len"]),
        horizon=int(meta["horizon"]),
        n_features=int(meta["n_features"]),
        n_targets=int(meta["n_targets"]),
        distill=bool(int(meta["distill"])),
        activation=_mode_from_meta(meta),
    )
    model = Forecaster(cfg, seed=0)
    params = {k: v for k, v in tensors.items() if not k.startswith("x.")}
    extra = {k[2:]: v for k, v in tensors.items() if k.startswith("x.")}
    model.load_state_arrays(params)
    return model, extra, meta


def save_autoencoder(path, ae: Autoencoder) -> None:
    if ae.tau is None:
        raise RuntimeError("refusing to save an unfitted autoencoder")
    meta = {
        "kind": "autoencoder",
        "window_len": str(ae.window_len),
        "n_features": str(ae.n_features),
        "hidden": str(ae.hidden),
        "bottleneck": str(ae.bottleneck),
        "tau": repr(ae.tau),
    }
    te.save_tensors(path, {name: p.data for name, p in ae.params.items()}, meta)


def load_autoencoder(path) -> Autoencoder:
    tensors, meta = te.load_tensors(path)
    if meta.get("kind") != "autoencoder":
        raise ValueError(f"{path}: not an autoencoder checkpoint")
    ae = Autoencoder(
        window_len=int(meta["window_len"]),
        n_features=int(meta["n_features"]),
        hidden=int(meta["hidden"]),
        bottleneck=int(meta["bottleneck"]),
    )
    for name, p in ae.params.items():
        arr = tensors[name]
        if arr.shape != p.data.shape:
            raise ValueError(f"{path}: {name} has shape {arr.shape}")
        p.data = arr.copy()
    ae.tau = float(meta["tau"])
    return ae
