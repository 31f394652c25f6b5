"""Discrete-time chaotic neural oscillators and bifurcation sweeps.

Two related four-neuron maps. The original oscillator couples an
excitatory/inhibitory pair through a logistic sigmoid and is kept here as
the reference dynamical system. The retrograde-signalling variant feeds
the previous output back into both neurons and saturates through
``tanh(mu * x)``; it is the map that gets compiled into activation
functions elsewhere in this package.

Both maps share the output rule

    L = (E - I) * exp(-k * S^2) + Omega

where ``S`` is the stimulus entering the step. The Gaussian factor means
the E-I dynamics only matter near zero stimulus: for large ``|S|`` the
output collapses onto the input neuron's direct response, while inside
the narrow band around the origin the recurrence can oscillate or wander
chaotically, which is exactly the regime the downstream activation
functions harvest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

__all__ = [
    "N_STEPS_DEFAULT",
    "LeeParams",
    "LorsParams",
    "OscState",
    "Trajectory",
    "BifurcationData",
    "ZERO_STATE",
    "lee_step",
    "lors_step",
    "stimulus_signal",
    "simulate",
    "builtin_params",
    "builtin_type_ids",
    "bifurcation_sweep",
    "write_bifurcation_csv",
]

N_STEPS_DEFAULT = 100

# 17 significant digits: enough for exact float64 round trips in text output.
_FLOAT_FMT = "%.17g"


def _check_finite(obj, names) -> None:
    for name in names:
        v = getattr(obj, name)
        if not math.isfinite(v):
            raise ValueError(f"{type(obj).__name__}.{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class LeeParams:
    """Weights of the original sigmoid-coupled oscillator.

    e1, e2 scale the excitatory neuron's self- and cross-coupling, i1, i2
    the inhibitory neuron's. xi_e and xi_i are firing thresholds and k is
    the output decay constant.
    """

    e1: float
    e2: float
    i1: float
    i2: float
    xi_e: float = 0.0
    xi_i: float = 0.0
    k: float = 500.0

    def __post_init__(self) -> None:
        _check_finite(self, [f.name for f in fields(self)])
        if self.k < 0:
            raise ValueError(f"decay constant k must be >= 0, got {self.k}")


@dataclass(frozen=True)
class LorsParams:
    """Parameter vector of one retrograde-signalling oscillator.

    a1..a4 drive the excitatory update, b1..b4 the inhibitory one (a1/b1
    weight the fed-back output, a2/b2 the excitatory state, a3/b3 the
    inhibitory state, a4/b4 the stimulus). mu is the tanh input gain, k
    the output decay constant and e the external stimulus ratio added to
    the raw input as ``e * sgn(input)``.

    The signs stored here are substituted verbatim into the recurrence,
    which subtracts the b2 and b3 terms; builtin parameter sets therefore
    carry negative b2/b3 values where the effective coupling is positive.
    """

    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    b2: float
    b3: float
    b4: float
    mu: float
    k: float
    xi_e: float = 0.0
    xi_i: float = 0.0
    e: float = 0.001

    def __post_init__(self) -> None:
        _check_finite(self, [f.name for f in fields(self)])
        if self.k < 0:
            raise ValueError(f"decay constant k must be >= 0, got {self.k}")
        if self.mu <= 0:
            raise ValueError(f"tanh gain mu must be > 0, got {self.mu}")
        if self.e < 0:
            raise ValueError(f"stimulus ratio e must be >= 0, got {self.e}")


@dataclass(frozen=True)
class OscState:
    """State of either oscillator after one step.

    e and i are the excitatory/inhibitory activations, omega the input
    neuron's direct response and out the oscillator output L. Reachable
    states keep |e|, |i|, |omega| <= 1 and |out| <= 3; only finiteness is
    enforced here.
    """

    e: float = 0.0
    i: float = 0.0
    omega: float = 0.0
    out: float = 0.0

    def __post_init__(self) -> None:
        _check_finite(self, ("e", "i", "omega", "out"))


ZERO_STATE = OscState()


@dataclass(frozen=True)
class Trajectory:
    """Output sequence of a constant-stimulus run started from rest.

    values[t] is the oscillator output after step t+1; len(values) equals
    the requested number of steps. states is populated only on request.
    """

    values: np.ndarray
    states: Optional[tuple[OscState, ...]] = None


@dataclass(frozen=True)
class BifurcationData:
    """Settled outputs across a stimulus grid.

    outputs[j] holds the last ``keep_last`` trajectory values for
    stimulus_grid[j]; a tight cluster means a fixed point or small cycle,
    a wide spread marks the chaotic band.
    """

    stimulus_grid: np.ndarray
    outputs: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.stimulus_grid, dtype=np.float64)
        outs = np.asarray(self.outputs, dtype=np.float64)
        if grid.ndim != 1 or outs.ndim != 2 or outs.shape[0] != grid.shape[0]:
            raise ValueError(
                f"grid/outputs shapes inconsistent: {grid.shape} vs {outs.shape}"
            )
        if grid.shape[0] > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("stimulus_grid must be strictly ascending")
        object.__setattr__(self, "stimulus_grid", grid)
        object.__setattr__(self, "outputs", outs)


def _sigmoid(x: float) -> float:
    # Branch keeps exp() away from overflow for large |x|.
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _sgn(x: float) -> float:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def stimulus_signal(raw_input: float, e: float) -> float:
    """Effective stimulus ``S = i + e * sgn(i)`` with sgn(0) = 0."""
    if not math.isfinite(raw_input):
        raise ValueError(f"input must be finite, got {raw_input!r}")
    return raw_input + e * _sgn(raw_input)


def lee_step(state: OscState, stimulus: float, p: LeeParams) -> OscState:
    """Advance the original sigmoid-coupled oscillator by one step.

    The stimulus is used directly (no external-ratio shaping). E, I and
    Omega are updated from the previous state, then the output is formed
    from the new activations and the same stimulus:

        E' = Sig(e1*E - e2*I + S - xi_e)
        I' = Sig(i1*E - i2*I - xi_i)
        O' = Sig(S)
        L' = (E' - I') * exp(-k * S^2) + O'
    """
    if not math.isfinite(stimulus):
        raise ValueError(f"stimulus must be finite, got {stimulus!r}")
    s = stimulus
    e_new = _sigmoid(p.e1 * state.e - p.e2 * state.i + s - p.xi_e)
    i_new = _sigmoid(p.i1 * state.e - p.i2 * state.i - p.xi_i)
    omega_new = _sigmoid(s)
    out = (e_new - i_new) * math.exp(-p.k * s * s) + omega_new
    return OscState(e_new, i_new, omega_new, out)


def _lors_update(
    e: float, i: float, omega: float, out: float, s: float, p: LorsParams
) -> tuple[float, float, float, float]:
    # Shared scalar kernel so single steps and whole trajectories are
    # bit-identical by construction.
    e_new = math.tanh(p.mu * (p.a1 * out + p.a2 * e - p.a3 * i + p.a4 * s - p.xi_e))
    i_new = math.tanh(p.mu * (p.b1 * out - p.b2 * e - p.b3 * i + p.b4 * s - p.xi_i))
    omega_new = math.tanh(p.mu * s)
    out_new = (e_new - i_new) * math.exp(-p.k * s * s) + omega_new
    return e_new, i_new, omega_new, out_new


def lors_step(state: OscState, raw_input: float, p: LorsParams) -> OscState:
    """Advance the retrograde-signalling oscillator by one step.

    The raw input is first shaped into ``S = i + e * sgn(i)``; E, I and
    Omega are then updated from the previous state (the previous output
    enters through a1/b1) and the new output uses the fresh activations
    with the same S.
    """
    s = stimulus_signal(raw_input, p.e)
    e_new, i_new, omega_new, out = _lors_update(
        state.e, state.i, state.omega, state.out, s, p
    )
    return OscState(e_new, i_new, omega_new, out)


def simulate(
    raw_input: float,
    p: LorsParams,
    n_steps: int = N_STEPS_DEFAULT,
    record_states: bool = False,
) -> Trajectory:
    """Run the retrograde oscillator from rest under constant input.

    Starts from the all-zero state, holds the input fixed for n_steps
    steps and records the output after each one.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    s = stimulus_signal(raw_input, p.e)
    e = i = omega = out = 0.0
    values = np.empty(n_steps, dtype=np.float64)
    states: Optional[list[OscState]] = [] if record_states else None
    for t in range(n_steps):
        e, i, omega, out = _lors_update(e, i, omega, out, s, p)
        values[t] = out
        if states is not None:
            states.append(OscState(e, i, omega, out))
    return Trajectory(values, tuple(states) if states is not None else None)


# Eight builtin parameter sets. Indexed by type id 1..8; b2/b3 are stored
# with the signs the recurrence expects (see LorsParams docstring).
_BUILTIN: dict[int, LorsParams] = {
    1: LorsParams(a1=0.0, a2=5.0, a3=5.0, a4=1.0,
                  b1=0.0, b2=-1.0, b3=1.0, b4=0.0, mu=5.0, k=500.0),
    2: LorsParams(a1=0.5, a2=0.55, a3=0.55, a4=-0.5,
                  b1=0.5, b2=-0.55, b3=-0.55, b4=-0.5, mu=1.0, k=50.0),
    3: LorsParams(a1=0.5, a2=0.6, a3=0.55, a4=0.5,
                  b1=-0.5, b2=-0.6, b3=-0.55, b4=0.5, mu=1.0, k=50.0),
    4: LorsParams(a1=-0.5, a2=0.55, a3=0.55, a4=-0.5,
                  b1=-0.5, b2=-0.55, b3=-0.55, b4=0.5, mu=1.0, k=50.0),
    5: LorsParams(a1=-0.9, a2=0.9, a3=0.9, a4=-0.9,
                  b1=0.9, b2=-0.9, b3=-0.9, b4=0.9, mu=1.0, k=50.0),
    6: LorsParams(a1=-0.9, a2=0.9, a3=0.9, a4=-0.9,
                  b1=0.9, b2=-0.9, b3=-0.9, b4=0.9, mu=1.0, k=300.0),
    7: LorsParams(a1=-5.0, a2=5.0, a3=5.0, a4=-5.0,
                  b1=1.0, b2=-1.0, b3=-1.0, b4=1.0, mu=1.0, k=50.0),
    8: LorsParams(a1=-5.0, a2=5.0, a3=5.0, a4=-5.0,
                  b1=1.0, b2=-1.0, b3=-1.0, b4=1.0, mu=1.0, k=300.0),
}


def builtin_type_ids() -> tuple[int, ...]:
    """Ids of the builtin oscillator types, ascending."""
    return tuple(sorted(_BUILTIN))


def builtin_params(type_id: int) -> LorsParams:
    """Builtin parameter set for oscillator type 1..8."""
    try:
        return _BUILTIN[type_id]
    except KeyError:
        raise ValueError(
            f"unknown oscillator type {type_id!r}; valid ids are 1..8"
        ) from None


def bifurcation_sweep(
    p: LorsParams,
    x_lo: float,
    x_hi: float,
    n_x: int = 401,
    n_steps: int = 300,
    keep_last: int = 100,
) -> BifurcationData:
    """Sweep a stimulus grid and record the settled outputs per point.

    Each grid point is simulated for n_steps from rest and the final
    keep_last outputs are retained.
    """
    if n_x < 1:
        raise ValueError(f"n_x must be >= 1, got {n_x}")
    if n_x > 1 and not x_lo < x_hi:
        raise ValueError(f"need x_lo < x_hi for a multi-point grid, got [{x_lo}, {x_hi}]")
    if not (math.isfinite(x_lo) and math.isfinite(x_hi)):
        raise ValueError("grid bounds must be finite")
    if keep_last < 1 or keep_last > n_steps:
        raise ValueError(
            f"keep_last must be in 1..n_steps, got keep_last={keep_last} n_steps={n_steps}"
        )
    grid = np.linspace(x_lo, x_hi, n_x) if n_x > 1 else np.array([x_lo], dtype=np.float64)
    outputs = np.empty((n_x, keep_last), dtype=np.float64)
    for j, x in enumerate(grid):
        outputs[j] = simulate(float(x), p, n_steps).values[-keep_last:]
    return BifurcationData(grid, outputs)


def write_bifurcation_csv(data: BifurcationData, path) -> None:
    """Write sweep results as ``x,lors`` rows, one per retained value."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,lors\n")
        for x, row in zip(data.stimulus_grid, data.outputs):
            for v in row:
                fh.write(f"{_FLOAT_FMT % x},{_FLOAT_FMT % v}\n")
