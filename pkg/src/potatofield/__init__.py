"""Automatic EEG artifact rejection with potato fields of covariance matrices.

Epochs of a multichannel recording are mapped to covariance matrices on the
SPD manifold; each potato models a channel subset in a frequency band, and
per-potato p-values are combined into a per-epoch Signal Quality Index with
an adaptively chosen rejection threshold.
"""

from .dsp import OutlierGate, bandpass, fit_outlier_gate, frms
from .evaluation import ConfusionCounts, MetricSet, cohens_d, confusion, metrics
from .field import (
    FieldModel,
    Method,
    SqiReport,
    fit_irpf,
    make_default_field_config,
    run_irpf,
    run_rp,
    run_rpf,
    score_irpf,
)
from .kneedle import KneeResult, find_knee
from .potato import PotatoModel, fit_adaptive, fit_simple, rp_classify, score
from .signal_io import (
    EpochSet,
    FieldConfig,
    Label,
    PotatoSpec,
    Recording,
    epoch,
    load_field_config,
    load_labels,
    load_recording,
)
from .spd import DistanceKind, covariance, distance, geometric_mean, inv_sqrt
from .stats import (
    CombinerKind,
    DispersionStats,
    StatsMode,
    combine,
    fit_dispersion,
    z_score,
    z_to_p,
)
from .synthetic import MONTAGE_21, SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "ConfusionCounts",
    "CombinerKind",
    "DispersionStats",
    "DistanceKind",
    "EpochSet",
    "FieldConfig",
    "FieldModel",
    "KneeResult",
    "Label",
    "Method",
    "MetricSet",
    "MONTAGE_21",
    "OutlierGate",
    "PotatoModel",
    "PotatoSpec",
    "Recording",
    "SqiReport",
    "StatsMode",
    "SyntheticSpec",
    "bandpass",
    "cohens_d",
    "combine",
    "confusion",
    "covariance",
    "distance",
    "epoch",
    "find_knee",
    "fit_adaptive",
    "fit_dispersion",
    "fit_irpf",
    "fit_outlier_gate",
    "fit_simple",
    "frms",
    "generate_synthetic",
    "geometric_mean",
    "inv_sqrt",
    "load_field_config",
    "load_labels",
    "load_recording",
    "make_default_field_config",
    "metrics",
    "rp_classify",
    "run_irpf",
    "run_rp",
    "run_rpf",
    "score",
    "score_irpf",
    "z_score",
    "z_to_p",
]
