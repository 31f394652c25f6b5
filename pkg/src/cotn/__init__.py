"""Chaotic-oscillator meta-activations and a toy transformer forecaster.

The package turns a two-neuron excitatory/inhibitory oscillator into a
scalar activation function (max over a short settled trajectory),
tabulates it, blends it with GELU behind a lambda gate, and trains a
small encoder/decoder attention model with convolutional distillation
and autoencoder-weighted losses on volatile series.
"""

__version__ = "0.1.0"

from .activation import (
    GateConfig,
    MetaActivationTable,
    build_table,
    gated_activation,
    gelu,
    mot_activation_exact,
    table_eval,
    table_for_type,
)
from .model import ActivationMode, Autoencoder, Forecaster, ModelConfig
from .oscillator import (
    LeeParams,
    LorsParams,
    builtin_params,
    builtin_type_ids,
    lee_step,
    lors_step,
    simulate,
)
from .training import (
    TrainConfig,
    TrialReport,
    multi_trial,
    run_training,
    sweep_types,
)

__all__ = [
    "__version__",
    "ActivationMode",
    "Autoencoder",
    "Forecaster",
    "GateConfig",
    "LeeParams",
    "LorsParams",
    "MetaActivationTable",
    "ModelConfig",
    "TrainConfig",
    "TrialReport",
    "build_table",
    "builtin_params",
    "builtin_type_ids",
    "gated_activation",
    "gelu",
    "lee_step",
    "lors_step",
    "mot_activation_exact",
    "multi_trial",
    "run_training",
    "simulate",
    "sweep_types",
    "table_eval",
    "table_for_type",
]
