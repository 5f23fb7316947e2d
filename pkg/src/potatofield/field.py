"""Full potato field: per-potato pipelines, SQI combination, rejection.

Exposes three end-to-end methods on an epoched recording: the adaptive
field (gate, adaptive robust fits, combined SQI, knee-based threshold), the
fixed-threshold field baseline, and the single all-channel potato baseline.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import potato as potato_mod
from . import spd
from .dsp import OutlierGate, bandpass, fit_outlier_gate
from .errors import DimensionMismatch, TooFewCleanEpochs, TooFewEpochs
from .kneedle import MIN_POINTS, find_knee
from .potato import PotatoModel
from .signal_io import (
    OPEN_BAND_NYQUIST_FRACTION,
    EpochSet,
    FieldConfig,
    PotatoSpec,
    Recording,
    validate_field_config,
)
from .spd import DistanceKind
from .stats import CombinerKind, combine_rows, z_to_p

MIN_FIT_EPOCHS = 10
RPF_TRIM_Z = 2.0
RPF_TRIM_ITERATIONS = 3


class Method(Enum):
    IRPF = "irpf"
    RPF = "rpf"
    RP = "rp"


@dataclass(frozen=True)
class FieldModel:
    """Fitted potato field plus the outlier gate used while fitting."""

    specs: tuple[PotatoSpec, ...]
    models: tuple[PotatoModel, ...]
    gate: OutlierGate
    combiner: CombinerKind
    sampling_rate: float
    channel_names: tuple[str, ...]
    knee_scale: float = potato_mod.DEFAULT_KNEE_SCALE


@dataclass(frozen=True)
class SqiReport:
    """Per-epoch p-values, combined SQI, threshold and rejection masks.

    ``rejected[i] == gate_rejected[i] or sqi[i] < threshold`` throughout;
    gate-rejected epochs carry SQI 0 and never take part in knee detection.
    """

    per_potato_p: np.ndarray
    sqi: np.ndarray
    threshold: float
    gate_rejected: np.ndarray
    rejected: np.ndarray
    method: Method
    knee_found: bool


def _band_edges(spec: PotatoSpec, rate: float) -> tuple[float | None, float | None]:
    """Filter edges for a potato; open-ended highs become 0.9-Nyquist bands."""
    low = spec.band_low if spec.band_low > 0 else None
    if spec.band_high is None:
        return low, OPEN_BAND_NYQUIST_FRACTION * rate / 2.0
    return low, spec.band_high


def _potato_covariances(epoch_set: EpochSet, spec: PotatoSpec,
                        channel_names: tuple[str, ...], rate: float) -> np.ndarray:
    """Channel-select, band-filter and covariance every epoch for one potato."""
    idx = [channel_names.index(name) for name in spec.channels]
    low, high = _band_edges(spec, rate)
    filtered = bandpass(epoch_set.epochs[:, idx, :], low, high, rate)
    return np.stack([spd.covariance(ep) for ep in filtered])


def _apply_gate(recording: Recording, epoch_set: EpochSet, u_lim: float) -> OutlierGate:
    gate = fit_outlier_gate(recording, epoch_set, u_lim)
    if int((~gate.rejected).sum()) < potato_mod.MIN_SURVIVORS:
        raise TooFewCleanEpochs(
            f"only {(~gate.rejected).sum()} epochs survive the outlier gate"
        )
    return gate


def fit_irpf(
    recording: Recording,
    epoch_set: EpochSet,
    config: FieldConfig,
    knee_scale: float = potato_mod.DEFAULT_KNEE_SCALE,
) -> FieldModel:
    """Fit the adaptive potato field on gate-surviving epochs.

    The outlier gate runs on the (already broad-band preprocessed)
    recording; each potato is then fitted adaptively on the covariances of
    the epochs the gate kept.
    """
    if len(epoch_set) < MIN_FIT_EPOCHS:
        raise TooFewEpochs(f"need at least {MIN_FIT_EPOCHS} epochs, got {len(epoch_set)}")
    validate_field_config(config, recording.channel_names, recording.sampling_rate)
    gate = _apply_gate(recording, epoch_set, config.u_lim)
    keep = ~gate.rejected
    models = []
    for spec in config.potatoes:
        covs = _potato_covariances(epoch_set, spec, recording.channel_names,
                                   recording.sampling_rate)
        models.append(
            potato_mod.fit_adaptive(
                covs[keep],
                spec.distance,
                channels=spec.channels,
                band=(spec.band_low, spec.band_high),
                knee_scale=knee_scale,
            )
        )
    return FieldModel(
        specs=config.potatoes,
        models=tuple(models),
        gate=gate,
        combiner=config.combiner,
        sampling_rate=recording.sampling_rate,
        channel_names=recording.channel_names,
        knee_scale=knee_scale,
    )


def _score_field(
    model: FieldModel,
    epoch_set: EpochSet,
    combiner: CombinerKind,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-potato p matrix (J, E) and combined SQI for every epoch."""
    n_epochs = len(epoch_set)
    if model.gate.rejected.shape[0] != n_epochs:
        raise DimensionMismatch(
            f"gate fitted on {model.gate.rejected.shape[0]} epochs, scoring {n_epochs}"
        )
    rows = []
    for spec, pot in zip(model.specs, model.models):
        covs = _potato_covariances(epoch_set, spec, model.channel_names,
                                   model.sampling_rate)
        _, p = potato_mod.score_many(pot, covs)
        rows.append(p)
    per_potato_p = np.vstack(rows)
    sqi = combine_rows(per_potato_p.T, combiner)
    return per_potato_p, sqi


def _threshold_from_knee(sqi: np.ndarray, gate_rejected: np.ndarray,
                         knee_scale: float) -> tuple[float, bool]:
    """Knee of the ascending-sorted SQI curve over non-gated epochs.

    The rejection region is the low block of the curve, so the knee is
    searched in the convex-elbow reading. No detectable knee means no
    separable artifact cluster: the threshold falls back to 0 and nothing
    is rejected beyond the gate.
    """
    candidates = np.sort(sqi[~gate_rejected])
    if candidates.size < MIN_POINTS:
        return 0.0, False
    sensitivity = potato_mod.knee_sensitivity(candidates.size, knee_scale)
    knee = find_knee(candidates, sensitivity, shape="convex")
    if knee.index is None:
        return 0.0, False
    return float(knee.value), True


def score_irpf(
    model: FieldModel,
    epoch_set: EpochSet,
    fixed_threshold: float | None = None,
) -> SqiReport:
    """Score every epoch with the fitted field and reject below threshold.

    ``fixed_threshold`` bypasses knee detection (ablation and baseline use);
    the default adaptive threshold is the SQI value at the knee of the
    sorted SQI curve.
    """
    per_potato_p, sqi = _score_field(model, epoch_set, model.combiner)
    sqi = sqi.copy()
    sqi[model.gate.rejected] = 0.0
    if fixed_threshold is None:
        threshold, knee_found = _threshold_from_knee(
            sqi, model.gate.rejected, model.knee_scale
        )
    else:
        threshold, knee_found = float(fixed_threshold), False
    rejected = model.gate.rejected | (sqi < threshold)
    return SqiReport(
        per_potato_p=per_potato_p,
        sqi=sqi,
        threshold=threshold,
        gate_rejected=model.gate.rejected.copy(),
        rejected=rejected,
        method=Method.IRPF,
        knee_found=knee_found,
    )


def run_irpf(
    recording: Recording,
    epoch_set: EpochSet,
    config: FieldConfig,
    knee_scale: float = potato_mod.DEFAULT_KNEE_SCALE,
    fixed_threshold: float | None = None,
) -> SqiReport:
    """Fit and score the adaptive field on the same epoched recording."""
    model = fit_irpf(recording, epoch_set, config, knee_scale)
    return score_irpf(model, epoch_set, fixed_threshold)


def run_rpf(
    recording: Recording,
    epoch_set: EpochSet,
    config: FieldConfig,
    p_threshold: float | None = None,
) -> SqiReport:
    """Fixed-threshold potato-field baseline.

    Same gate as the adaptive method; every potato uses the Riemannian
    distance only and a fixed-z robust trim (z > 2 for three fits); p-values
    are combined with Fisher's function; epochs whose SQI falls strictly
    below the fixed p threshold are rejected.
    """
    if len(epoch_set) < MIN_FIT_EPOCHS:
        raise TooFewEpochs(f"need at least {MIN_FIT_EPOCHS} epochs, got {len(epoch_set)}")
    validate_field_config(config, recording.channel_names, recording.sampling_rate)
    p_th = config.rpf_p_threshold if p_threshold is None else float(p_threshold)
    gate = _apply_gate(recording, epoch_set, config.u_lim)
    keep = ~gate.rejected
    specs = tuple(
        dataclasses.replace(spec, distance=DistanceKind.RIEMANNIAN)
        for spec in config.potatoes
    )
    models = []
    for spec in specs:
        covs = _potato_covariances(epoch_set, spec, recording.channel_names,
                                   recording.sampling_rate)
        models.append(
            potato_mod.fit_fixed_trim(
                covs[keep],
                DistanceKind.RIEMANNIAN,
                z_threshold=RPF_TRIM_Z,
                n_iterations=RPF_TRIM_ITERATIONS,
                channels=spec.channels,
                band=(spec.band_low, spec.band_high),
            )
        )
    model = FieldModel(
        specs=specs,
        models=tuple(models),
        gate=gate,
        combiner=CombinerKind.FISHER,
        sampling_rate=recording.sampling_rate,
        channel_names=recording.channel_names,
    )
    per_potato_p, sqi = _score_field(model, epoch_set, CombinerKind.FISHER)
    sqi = sqi.copy()
    sqi[gate.rejected] = 0.0
    rejected = gate.rejected | (sqi < p_th)
    return SqiReport(
        per_potato_p=per_potato_p,
        sqi=sqi,
        threshold=p_th,
        gate_rejected=gate.rejected.copy(),
        rejected=rejected,
        method=Method.RPF,
        knee_found=False,
    )


def run_rp(
    recording: Recording,
    epoch_set: EpochSet,
    z_th: float = 2.0,
    u_lim: float = 1.0,
) -> SqiReport:
    """Single all-channel potato baseline on the preprocessing band.

    Covariances are taken over all channels without further band filtering;
    the potato is fitted without trimming on gate-surviving epochs and an
    epoch is an artifact when its z strictly exceeds ``z_th``. The SQI
    column carries the z-derived p for uniform reporting, so the rejection
    rule is equivalent to sqi < z_to_p(z_th).
    """
    if len(epoch_set) < MIN_FIT_EPOCHS:
        raise TooFewEpochs(f"need at least {MIN_FIT_EPOCHS} epochs, got {len(epoch_set)}")
    gate = _apply_gate(recording, epoch_set, u_lim)
    keep = ~gate.rejected
    covs = np.stack([spd.covariance(ep) for ep in epoch_set.epochs])
    model = potato_mod.fit_simple(
        covs[keep],
        DistanceKind.RIEMANNIAN,
        channels=recording.channel_names,
    )
    z, p = potato_mod.score_many(model, covs)
    sqi = p.copy()
    sqi[gate.rejected] = 0.0
    threshold = z_to_p(z_th)
    rejected = gate.rejected | (z > z_th)
    return SqiReport(
        per_potato_p=p[None, :],
        sqi=sqi,
        threshold=float(threshold),
        gate_rejected=gate.rejected.copy(),
        rejected=rejected,
        method=Method.RP,
        knee_found=False,
    )


# Channel groups of the reference 21-electrode montage used to assemble a
# default field: pre-frontal potatoes for eye-related artifacts (low band),
# peripheral pairs for myogenic artifacts (high band).
EYE_BAND = (0.1, 7.0)
EMG_BAND_LOW = 20.0


def make_default_field_config(channel_names, **overrides) -> FieldConfig:
    """Assemble the standard eye + myogenic potato field for a montage.

    Builds, from whichever channels are present: a pre-frontal horizontal
    potato (Riemannian), a pre-frontal vertical potato (Euclidean), a blink
    potato (Riemannian), all in 0.1-7 Hz; and diagonal-Euclidean potatoes
    above 20 Hz on the peripheral pairs F7/F8, T7/T8, P7/P8 and O1/Oz/O2.
    """
    names = set(channel_names)
    potatoes = []

    def add(channels, band_low, band_high, kind):
        if set(channels) <= names:
            potatoes.append(PotatoSpec(tuple(channels), band_low, band_high, kind))

    add(("Fp1", "Fp2"), *EYE_BAND, DistanceKind.RIEMANNIAN)
    add(("Fp1", "Fp2"), *EYE_BAND, DistanceKind.EUCLIDEAN)
    add(("Fp1", "Fpz", "Fp2"), *EYE_BAND, DistanceKind.RIEMANNIAN)
    for group in (("F7", "F8"), ("T7", "T8"), ("P7", "P8"), ("O1", "Oz", "O2")):
        add(group, EMG_BAND_LOW, None, DistanceKind.DIAG_EUCLIDEAN)
    return FieldConfig(potatoes=tuple(potatoes), **overrides)
