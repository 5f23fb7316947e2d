"""Recording ingestion, epoch segmentation, labels and field configuration.

The interchange format is deliberately neutral: recordings are CSV (header
row of channel names, one row per sample, microvolts), labels are one 0/1
integer per line, and field configurations are JSON. Sampling rate is passed
as metadata, never inferred.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from enum import IntEnum
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    BandOutOfRange,
    DurationTooLong,
    EmptyField,
    EmptyFile,
    InvalidLabelValue,
    LengthMismatch,
    MalformedFile,
    UnknownChannel,
)
from .spd import DistanceKind
from .stats import CombinerKind

DEFAULT_COMBINER = CombinerKind.META_TIPPETT_OVER_LIPTAK_FISHER
DEFAULT_U_LIM = 1.0
DEFAULT_RP_Z_THRESHOLD = 2.0
DEFAULT_RPF_P_THRESHOLD = 0.01
# Open-ended high-pass bands are realized as band-passes up to this fraction
# of Nyquist, keeping the filter design uniform.
OPEN_BAND_NYQUIST_FRACTION = 0.9


class Label(IntEnum):
    CLEAN = 0
    ARTIFACT = 1


@dataclass(frozen=True)
class Recording:
    """Multichannel sampled signal: (n_channels, n_times) in microvolts."""

    channel_names: tuple[str, ...]
    sampling_rate: float
    samples: np.ndarray

    def __post_init__(self):
        if len(set(self.channel_names)) != len(self.channel_names):
            raise MalformedFile("duplicate channel names")
        if self.sampling_rate <= 0:
            raise ValueError("sampling_rate must be positive")
        if self.samples.ndim != 2 or self.samples.shape[0] != len(self.channel_names):
            raise ValueError(
                f"samples shape {self.samples.shape} does not match "
                f"{len(self.channel_names)} channels"
            )
        if self.samples.shape[1] < 1:
            raise ValueError("recording must hold at least one sample")

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    @property
    def n_times(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class EpochSet:
    """Fixed-length non-overlapping segmentation of a recording.

    ``epochs`` is (n_epochs, n_channels, n_times_per_epoch);
    ``source_indices`` holds the start sample of each epoch in the recording;
    ``labels`` is an optional per-epoch array of Label values.
    """

    epochs: np.ndarray
    epoch_duration: float
    source_indices: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != len(self.epochs):
            raise LengthMismatch(
                f"{len(self.labels)} labels for {len(self.epochs)} epochs"
            )

    def __len__(self) -> int:
        return self.epochs.shape[0]

    def with_labels(self, labels) -> "EpochSet":
        return replace(self, labels=np.asarray(labels, dtype=np.int8))


@dataclass(frozen=True)
class PotatoSpec:
    """One potato: channel subset, frequency band, distance kind.

    ``band_high`` None means an open-ended high-pass band.
    """

    channels: tuple[str, ...]
    band_low: float
    band_high: float | None
    distance: DistanceKind


@dataclass(frozen=True)
class FieldConfig:
    """Full potato-field configuration with rejection parameters."""

    potatoes: tuple[PotatoSpec, ...]
    combiner: CombinerKind = DEFAULT_COMBINER
    u_lim: float = DEFAULT_U_LIM
    rp_z_threshold: float = DEFAULT_RP_Z_THRESHOLD
    rpf_p_threshold: float = DEFAULT_RPF_P_THRESHOLD


def load_recording(path, sampling_rate: float) -> Recording:
    """Load a CSV recording: header row of channel names, one row per sample.

    Raises MalformedFile on ragged rows, non-numeric cells or duplicate
    channel names, and EmptyFile when there is no header or no data row.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: empty file") from None
    names = tuple(name.strip() for name in header)
    if any(not name for name in names):
        raise MalformedFile(f"{path}: blank channel name in header")
    if len(set(names)) != len(names):
        raise MalformedFile(f"{path}: duplicate channel name in header")
    try:
        frame = pd.read_csv(path, skiprows=1, header=None, dtype=float)
    except pd.errors.EmptyDataError:
        raise EmptyFile(f"{path}: no data rows") from None
    except (ValueError, pd.errors.ParserError) as exc:
        raise MalformedFile(f"{path}: {exc}") from None
    data = frame.to_numpy()
    if data.shape[1] != len(names):
        raise MalformedFile(
            f"{path}: {data.shape[1]} columns of data for {len(names)} header names"
        )
    if not np.all(np.isfinite(data)):
        raise MalformedFile(f"{path}: missing or non-finite cell")
    if data.shape[0] < 1:
        raise EmptyFile(f"{path}: no data rows")
    return Recording(names, float(sampling_rate), np.ascontiguousarray(data.T))


def save_recording(recording: Recording, path) -> None:
    """Write a Recording in the CSV interchange format."""
    header = ",".join(recording.channel_names)
    np.savetxt(path, recording.samples.T, fmt="%.6f", delimiter=",",
               header=header, comments="")


def epoch(recording: Recording, duration: float) -> EpochSet:
    """Segment a recording into non-overlapping fixed-duration epochs.

    Trailing samples that do not fill a whole epoch are dropped. Raises
    DurationTooLong when not even one epoch fits.
    """
    samples_per_epoch = int(round(duration * recording.sampling_rate))
    if samples_per_epoch < 2:
        raise DurationTooLong(
            f"duration {duration}s yields {samples_per_epoch} samples per epoch"
        )
    n_epochs = recording.n_times // samples_per_epoch
    if n_epochs == 0:
        raise DurationTooLong(
            f"duration {duration}s exceeds recording length "
            f"{recording.n_times / recording.sampling_rate}s"
        )
    starts = np.arange(n_epochs) * samples_per_epoch
    used = n_epochs * samples_per_epoch
    epochs = recording.samples[:, :used].reshape(
        recording.n_channels, n_epochs, samples_per_epoch
    )
    epochs = np.ascontiguousarray(np.swapaxes(epochs, 0, 1))
    return EpochSet(epochs, float(duration), starts)


def load_labels(path, n_epochs: int) -> list[Label]:
    """Read one 0/1 integer per line; 0 maps to Clean, 1 to Artifact."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    entries = [line.strip() for line in lines if line.strip() != ""]
    if len(entries) != n_epochs:
        raise LengthMismatch(f"{len(entries)} labels for {n_epochs} epochs")
    labels = []
    for i, entry in enumerate(entries):
        if entry not in ("0", "1"):
            raise InvalidLabelValue(f"line {i + 1}: {entry!r} is not 0 or 1")
        labels.append(Label(int(entry)))
    return labels


def save_mask(mask, path) -> None:
    """Write a rejection mask, one 0/1 per line (1 = Artifact)."""
    text = "\n".join(str(int(bool(v))) for v in mask) + "\n"
    Path(path).write_text(text, encoding="utf-8")


_DISTANCE_NAMES = {kind.value: kind for kind in DistanceKind}
_COMBINER_NAMES = {kind.value: kind for kind in CombinerKind}


def _validate_spec(spec: PotatoSpec, channel_names, nyquist: float) -> None:
    if not spec.channels:
        raise EmptyField("potato with no channels")
    for name in spec.channels:
        if name not in channel_names:
            raise UnknownChannel(f"channel {name!r} not in recording")
    high_limit = nyquist if spec.band_high is not None else OPEN_BAND_NYQUIST_FRACTION * nyquist
    if spec.band_low < 0:
        raise BandOutOfRange(f"negative band edge {spec.band_low}")
    if spec.band_high is not None and spec.band_high > nyquist:
        raise BandOutOfRange(f"band edge {spec.band_high} Hz above Nyquist {nyquist} Hz")
    if spec.band_high is not None and not spec.band_low < spec.band_high:
        raise BandOutOfRange(f"empty band {spec.band_low}-{spec.band_high} Hz")
    if spec.band_low >= high_limit:
        raise BandOutOfRange(f"band low {spec.band_low} Hz leaves no pass band")
    if spec.band_low == 0 and spec.band_high is None:
        raise BandOutOfRange("band with neither edge")


def validate_field_config(config: FieldConfig, channel_names, sampling_rate: float) -> FieldConfig:
    """Check a FieldConfig against a recording's channels and Nyquist limit."""
    if not config.potatoes:
        raise EmptyField("config defines no potatoes")
    if config.u_lim <= 0:
        raise ValueError("u_lim must be positive")
    if not 0.0 < config.rpf_p_threshold < 1.0:
        raise ValueError("rpf_p_threshold must lie in (0, 1)")
    nyquist = sampling_rate / 2.0
    for spec in config.potatoes:
        _validate_spec(spec, tuple(channel_names), nyquist)
    return config


def parse_field_config(payload: dict, channel_names, sampling_rate: float) -> FieldConfig:
    """Build and validate a FieldConfig from its JSON payload."""
    raw_potatoes = payload.get("potatoes", [])
    potatoes = []
    for entry in raw_potatoes:
        distance_name = entry.get("distance", "riemannian")
        if distance_name not in _DISTANCE_NAMES:
            raise ValueError(f"unknown distance {distance_name!r}")
        band_high = entry.get("band_high")
        potatoes.append(
            PotatoSpec(
                channels=tuple(entry["channels"]),
                band_low=float(entry.get("band_low", 0.0)),
                band_high=None if band_high is None else float(band_high),
                distance=_DISTANCE_NAMES[distance_name],
            )
        )
    combiner_name = payload.get("combiner", DEFAULT_COMBINER.value)
    if combiner_name not in _COMBINER_NAMES:
        raise ValueError(f"unknown combiner {combiner_name!r}")
    config = FieldConfig(
        potatoes=tuple(potatoes),
        combiner=_COMBINER_NAMES[combiner_name],
        u_lim=float(payload.get("u_lim", DEFAULT_U_LIM)),
        rp_z_threshold=float(payload.get("rp_z_threshold", DEFAULT_RP_Z_THRESHOLD)),
        rpf_p_threshold=float(payload.get("rpf_p_threshold", DEFAULT_RPF_P_THRESHOLD)),
    )
    return validate_field_config(config, channel_names, sampling_rate)


def load_field_config(path, recording: Recording) -> FieldConfig:
    """Load and validate a JSON field configuration against a recording."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return parse_field_config(payload, recording.channel_names, recording.sampling_rate)


def field_config_to_dict(config: FieldConfig) -> dict:
    """Serialize a FieldConfig to its JSON payload (round-trip stable)."""
    return {
        "potatoes": [
            {
                "channels": list(spec.channels),
                "band_low": spec.band_low,
                "band_high": spec.band_high,
                "distance": spec.distance.value,
            }
            for spec in config.potatoes
        ],
        "combiner": config.combiner.value,
        "u_lim": config.u_lim,
        "rp_z_threshold": config.rp_z_threshold,
        "rpf_p_threshold": config.rpf_p_threshold,
    }


def save_field_config(config: FieldConfig, path) -> None:
    Path(path).write_text(
        json.dumps(field_config_to_dict(config), indent=2) + "\n", encoding="utf-8"
    )
