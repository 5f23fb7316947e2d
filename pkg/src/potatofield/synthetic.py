"""Synthetic labeled EEG with injected artifacts for desk-scale evaluation.

Background activity is spectrally shaped (pink) noise mixed across channels
through a fixed per-seed matrix, so clean epochs share a stable covariance
structure. Artifact events are injected wholly inside individual epochs and
every epoch overlapping an event is labeled Artifact:

* blink - biphasic low-frequency pulse on the pre-frontal channels, same
  polarity everywhere;
* vem   - slow ramp on the pre-frontal channels with the opposite polarity
  pattern;
* hem   - slow step of opposite polarity on left/right frontal pairs;
* emg   - band-limited (>20 Hz) noise burst on one peripheral channel group;
* pop   - step discontinuity with a damped oscillation on one random
  channel (electrode contact loss).

Everything is reproducible from the spec's seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .dsp import bandpass
from .errors import InvalidSpec
from .signal_io import EpochSet, Label, Recording, epoch

MONTAGE_21 = (
    "Fp1", "Fpz", "Fp2",
    "F7", "F3", "Fz", "F4", "F8",
    "T7", "T8",
    "C3", "Cz", "C4",
    "P7", "P3", "Pz", "P4", "P8",
    "O1", "Oz", "O2",
)

ARTIFACT_KINDS = ("blink", "vem", "hem", "emg", "pop")

# Background texture.
BACKGROUND_STD_UV = 20.0
MIXING_STRENGTH = 0.25
PINK_KNEE_HZ = 1.0
WHITE_FLOOR = 0.05
# Brief common quiet dips: EEG amplitude is not symmetric around its
# running level, and the near-silent moments anchor the outlier gate's
# lower limit well below the operating range.
DIPS_PER_MINUTE = 1.0
DIP_DEPTH = (0.25, 0.4)
DIP_WIDTH_S = (0.25, 0.5)

# Event amplitude ranges (microvolts); low ends produce borderline events
# that a fixed rejection threshold tends to miss.
BLINK_AMP = (25.0, 90.0)
VEM_AMP = (20.0, 75.0)
HEM_AMP = (20.0, 75.0)
EMG_STD = (10.0, 45.0)
POP_AMP = (400.0, 1500.0)

EMG_GROUPS = (("F7", "F8"), ("T7", "T8"), ("P7", "P8"), ("O1", "Oz", "O2"))
EVENT_MARGIN_S = 0.15


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic labeled recording."""

    n_channels: int = 21
    duration_s: float = 400.0
    rate_hz: float = 200.0
    epoch_duration_s: float = 4.0
    artifact_mix: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0


@dataclass(frozen=True)
class InjectedEvent:
    """Ledger entry: which epoch got which artifact on which channels."""

    epoch_index: int
    kind: str
    channels: tuple[int, ...]


def _validate(spec: SyntheticSpec) -> None:
    if spec.n_channels < 1 or spec.n_channels > len(MONTAGE_21):
        raise InvalidSpec(f"n_channels must lie in 1..{len(MONTAGE_21)}")
    if spec.duration_s <= 0 or spec.rate_hz <= 0 or spec.epoch_duration_s <= 0:
        raise InvalidSpec("durations and rate must be positive")
    if spec.duration_s < spec.epoch_duration_s:
        raise InvalidSpec("recording shorter than one epoch")
    total = 0.0
    for kind, share in spec.artifact_mix.items():
        if kind not in ARTIFACT_KINDS:
            raise InvalidSpec(f"unknown artifact kind {kind!r}")
        if share < 0:
            raise InvalidSpec(f"negative proportion for {kind!r}")
        total += share
    if total >= 1.0:
        raise InvalidSpec(f"artifact proportions sum to {total}; remainder must stay clean")


def _pink_background(rng: np.random.Generator, n: int, t: int, rate: float) -> np.ndarray:
    """Per-channel 1/f noise with a white floor, mixed across channels."""
    freqs = np.fft.rfftfreq(t, d=1.0 / rate)
    shape = 1.0 / np.sqrt(freqs + PINK_KNEE_HZ) + WHITE_FLOOR
    shape[0] = 0.0  # no DC component
    spectra = (rng.standard_normal((n, freqs.size)) + 1j * rng.standard_normal((n, freqs.size)))
    sources = np.fft.irfft(spectra * shape, n=t, axis=1)
    sources /= sources.std(axis=1, keepdims=True)
    mixing = np.eye(n) + MIXING_STRENGTH * rng.standard_normal((n, n)) / np.sqrt(n)
    mixed = mixing @ sources
    mixed /= mixed.std(axis=1, keepdims=True)
    mixed *= _quiet_dips(rng, t, rate)
    return BACKGROUND_STD_UV * mixed


def _quiet_dips(rng: np.random.Generator, t: int, rate: float) -> np.ndarray:
    """Common amplitude envelope with brief near-silent dips, never above 1."""
    envelope = np.ones(t)
    n_dips = max(2, int(DIPS_PER_MINUTE * t / rate / 60.0))
    for _ in range(n_dips):
        width = int(rng.uniform(*DIP_WIDTH_S) * rate)
        depth = rng.uniform(*DIP_DEPTH)
        start = int(rng.uniform(0, max(1, t - width)))
        envelope[start : start + width] -= (1.0 - depth) * np.hanning(width)
    return np.clip(envelope, 0.05, 1.0)


def _hann_pulse(length: int) -> np.ndarray:
    return np.hanning(length) ** 2


def _smooth_step(length: int) -> np.ndarray:
    ramp = np.linspace(-3.0, 3.0, length)
    return 1.0 / (1.0 + np.exp(-ramp))


def _channel_weights(names: tuple[str, ...], weights: dict[str, float]) -> list[tuple[int, float]]:
    return [(names.index(ch), w) for ch, w in weights.items() if ch in names]


def _inject_blink(rng, samples, names, start, length, rate) -> tuple[int, ...]:
    amp = rng.uniform(*BLINK_AMP)
    dur = int(rng.uniform(0.25, 0.45) * rate)
    n_events = rng.integers(1, 4)
    targets = _channel_weights(names, {"Fp1": 1.0, "Fpz": 1.15, "Fp2": 1.0,
                                       "F3": 0.3, "Fz": 0.35, "F4": 0.3})
    pulse_main = _hann_pulse(dur)
    rebound = -0.35 * _hann_pulse(int(dur * 0.7))
    pulse = np.concatenate([pulse_main, rebound])
    hit = set()
    for _ in range(n_events):
        t0 = start + int(rng.uniform(0, max(1, length - pulse.size)))
        for ch, w in targets:
            samples[ch, t0 : t0 + pulse.size] += amp * w * pulse
            hit.add(ch)
    return tuple(sorted(hit))


def _inject_vem(rng, samples, names, start, length, rate) -> tuple[int, ...]:
    amp = rng.uniform(*VEM_AMP)
    dur = int(rng.uniform(0.8, 1.8) * rate)
    dur = min(dur, length - 2)
    targets = _channel_weights(names, {"Fp1": -1.0, "Fpz": -1.1, "Fp2": -1.0,
                                       "F3": -0.25, "F4": -0.25})
    up = _smooth_step(dur // 3)
    hold = np.ones(dur - 2 * (dur // 3))
    wave = np.concatenate([up, hold, 1.0 - _smooth_step(dur // 3)])
    t0 = start + int(rng.uniform(0, max(1, length - wave.size)))
    hit = set()
    for ch, w in targets:
        samples[ch, t0 : t0 + wave.size] += amp * w * wave
        hit.add(ch)
    return tuple(sorted(hit))


def _inject_hem(rng, samples, names, start, length, rate) -> tuple[int, ...]:
    amp = rng.uniform(*HEM_AMP)
    dur = int(rng.uniform(0.8, 1.6) * rate)
    dur = min(dur, length - 2)
    targets = _channel_weights(names, {"Fp1": 1.0, "Fp2": -1.0, "F7": 0.75, "F8": -0.75})
    step = _smooth_step(dur // 2)
    wave = np.concatenate([step, step[::-1]])
    t0 = start + int(rng.uniform(0, max(1, length - wave.size)))
    hit = set()
    for ch, w in targets:
        samples[ch, t0 : t0 + wave.size] += amp * w * wave
        hit.add(ch)
    return tuple(sorted(hit))


def _inject_emg(rng, samples, names, start, length, rate) -> tuple[int, ...]:
    groups = [g for g in EMG_GROUPS if set(g) <= set(names)]
    group = groups[rng.integers(len(groups))]
    dur = int(rng.uniform(1.0, 2.5) * rate)
    dur = min(dur, length - 2)
    std = rng.uniform(*EMG_STD)
    t0 = start + int(rng.uniform(0, max(1, length - dur)))
    envelope = np.hanning(dur)
    hit = []
    for ch_name in group:
        ch = names.index(ch_name)
        burst = rng.standard_normal(dur)
        burst = bandpass(burst, 25.0, min(70.0, 0.45 * rate), rate)
        burst *= std / burst.std()
        samples[ch, t0 : t0 + dur] += envelope * burst
        hit.append(ch)
    return tuple(sorted(hit))


def _inject_pop(rng, samples, names, start, length, rate) -> tuple[int, ...]:
    ch = int(rng.integers(len(names)))
    amp = rng.uniform(*POP_AMP) * rng.choice([-1.0, 1.0])
    t0 = start + int(rng.uniform(0, length * 0.6))
    tail = length - (t0 - start)
    t_rel = np.arange(tail) / rate
    decay = np.exp(-t_rel / rng.uniform(0.5, 1.2))
    ring_hz = rng.uniform(5.0, 10.0)
    ringing = 0.3 * np.sin(2.0 * np.pi * ring_hz * t_rel) * np.exp(-t_rel / 0.4)
    samples[ch, t0 : t0 + tail] += amp * (decay + ringing)
    return (ch,)


_INJECTORS = {
    "blink": _inject_blink,
    "vem": _inject_vem,
    "hem": _inject_hem,
    "emg": _inject_emg,
    "pop": _inject_pop,
}


def generate_synthetic_detailed(
    spec: SyntheticSpec,
) -> tuple[Recording, EpochSet, list[InjectedEvent]]:
    """Generate a labeled recording and the full injected-event ledger."""
    _validate(spec)
    if spec.artifact_mix.get("emg", 0) > 0:
        names_check = MONTAGE_21[: spec.n_channels]
        if not any(set(g) <= set(names_check) for g in EMG_GROUPS):
            raise InvalidSpec("emg events need at least one peripheral channel pair")
    rng = np.random.default_rng(spec.seed)
    names = MONTAGE_21[: spec.n_channels]
    t_total = int(round(spec.duration_s * spec.rate_hz))
    samples = _pink_background(rng, spec.n_channels, t_total, spec.rate_hz)

    epoch_len = int(round(spec.epoch_duration_s * spec.rate_hz))
    n_epochs = t_total // epoch_len
    margin = int(EVENT_MARGIN_S * spec.rate_hz)

    kinds = list(spec.artifact_mix.keys())
    shares = np.array([spec.artifact_mix[k] for k in kinds], dtype=float)
    cuts = np.cumsum(shares)

    events: list[InjectedEvent] = []
    for i in range(n_epochs):
        u = rng.random()
        kind = None
        for k, cut in zip(kinds, cuts):
            if u < cut:
                kind = k
                break
        if kind is None:
            continue
        start = i * epoch_len + margin
        usable = epoch_len - 2 * margin
        channels = _INJECTORS[kind](rng, samples, names, start, usable, spec.rate_hz)
        events.append(InjectedEvent(i, kind, channels))

    recording = Recording(names, spec.rate_hz, samples)
    epochs = epoch(recording, spec.epoch_duration_s)
    labels = np.full(n_epochs, Label.CLEAN, dtype=np.int8)
    for ev in events:
        labels[ev.epoch_index] = Label.ARTIFACT
    return recording, epochs.with_labels(labels), events


def generate_synthetic(spec: SyntheticSpec) -> tuple[Recording, EpochSet]:
    """Generate a synthetic recording and its labeled epoch set."""
    recording, epochs, _ = generate_synthetic_detailed(spec)
    return recording, epochs
