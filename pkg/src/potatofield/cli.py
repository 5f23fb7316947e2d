"""Command-line entry point: reject / eval / synth / export-review.

``reject`` runs one of the three methods over a CSV recording and writes a
rejection mask (one 0/1 per line, 1 = Artifact), an SQI report and a timing
summary. ``export-review`` bundles everything a reviewer needs into a single
self-contained JSON consumed by the browser UI.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import field as field_mod
from .errors import PotatoFieldError, TooFewCleanEpochs
from .evaluation import confusion, metric_record
from .signal_io import (
    EpochSet,
    FieldConfig,
    Recording,
    epoch,
    field_config_to_dict,
    load_field_config,
    load_labels,
    load_recording,
    save_mask,
    save_recording,
)
from .synthetic import ARTIFACT_KINDS, SyntheticSpec, generate_synthetic

EXIT_INPUT_ERROR = 2
EXIT_TOO_FEW_CLEAN = 3

REVIEW_BUNDLE_VERSION = 1
# Waveforms embedded in the review bundle are decimated to at most this many
# samples per channel, as min/max pairs so per-epoch extrema survive.
MAX_REVIEW_SAMPLES = 256


def decimate_minmax(wave: np.ndarray, max_samples: int = MAX_REVIEW_SAMPLES) -> np.ndarray:
    """Decimate one channel to (min, max) pairs over equal buckets."""
    t = wave.shape[-1]
    if t <= max_samples:
        return np.asarray(wave, dtype=float)
    n_buckets = max_samples // 2
    bounds = np.linspace(0, t, n_buckets + 1).astype(int)
    out = np.empty(2 * n_buckets)
    for i in range(n_buckets):
        chunk = wave[bounds[i] : bounds[i + 1]]
        out[2 * i] = chunk.min()
        out[2 * i + 1] = chunk.max()
    return out


def build_review_bundle(
    report: field_mod.SqiReport,
    epoch_set: EpochSet,
    recording: Recording,
    config: FieldConfig,
) -> dict:
    """Self-contained review payload: sorted SQI, threshold, waveforms."""
    sqi = report.sqi
    sorted_order = np.argsort(sqi, kind="stable")
    if report.knee_found:
        knee_index = int(np.searchsorted(sqi[sorted_order], report.threshold, side="left"))
    else:
        knee_index = None
    waveforms = [
        [decimate_minmax(channel).tolist() for channel in ep]
        for ep in epoch_set.epochs
    ]
    labels = None
    if epoch_set.labels is not None:
        labels = [int(v) for v in epoch_set.labels]
    return {
        "version": REVIEW_BUNDLE_VERSION,
        "method": report.method.value,
        "epoch_duration": epoch_set.epoch_duration,
        "channel_names": list(recording.channel_names),
        "sqi": [float(v) for v in sqi],
        "sorted_order": [int(v) for v in sorted_order],
        "knee_index": knee_index,
        "suggested_threshold": float(report.threshold),
        "labels": labels,
        "waveforms": waveforms,
        "config": field_config_to_dict(config),
    }


def _report_payload(report: field_mod.SqiReport, timing: dict) -> dict:
    return {
        "method": report.method.value,
        "n_epochs": int(report.sqi.size),
        "threshold": float(report.threshold),
        "knee_found": bool(report.knee_found),
        "sqi": [float(v) for v in report.sqi],
        "per_potato_p": [[float(v) for v in row] for row in report.per_potato_p],
        "gate_rejected": [int(v) for v in report.gate_rejected],
        "rejected": [int(v) for v in report.rejected],
        "timing": timing,
    }


def _load_inputs(args) -> tuple[Recording, EpochSet]:
    recording = load_recording(args.recording, args.rate)
    return recording, epoch(recording, args.duration)


def _load_config(args, recording: Recording) -> FieldConfig:
    if args.config is not None:
        config = load_field_config(args.config, recording)
    else:
        config = field_mod.make_default_field_config(recording.channel_names)
    if args.u_lim is not None:
        config = dataclasses.replace(config, u_lim=args.u_lim)
    return config


def _run_method(args, recording: Recording, epochs: EpochSet,
                config: FieldConfig) -> tuple[field_mod.SqiReport, dict]:
    t0 = time.perf_counter()
    if args.method == "irpf":
        model = field_mod.fit_irpf(recording, epochs, config, args.sensitivity)
        t1 = time.perf_counter()
        report = field_mod.score_irpf(model, epochs)
    elif args.method == "rpf":
        t1 = t0
        report = field_mod.run_rpf(recording, epochs, config, args.p_th)
    else:
        t1 = t0
        report = field_mod.run_rp(recording, epochs, args.z_th, config.u_lim)
    t2 = time.perf_counter()
    n = len(epochs)
    timing = {
        "total_s": t2 - t0,
        "fit_s": t1 - t0,
        "score_s": t2 - t1,
        "per_epoch_ms": 1000.0 * (t2 - t1) / n if args.method == "irpf" else
                        1000.0 * (t2 - t0) / n,
    }
    return report, timing


def cmd_reject(args) -> int:
    recording, epochs = _load_inputs(args)
    config = _load_config(args, recording)
    try:
        report, timing = _run_method(args, recording, epochs, config)
    except TooFewCleanEpochs as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_FEW_CLEAN
    save_mask(report.rejected, args.out)
    payload = _report_payload(report, timing)
    if args.report is not None:
        Path(args.report).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    n_rej = int(report.rejected.sum())
    print(
        f"{args.method}: rejected {n_rej}/{len(epochs)} epochs "
        f"(threshold {report.threshold:.6g}); "
        f"total {timing['total_s']:.3f} s, {timing['per_epoch_ms']:.2f} ms/epoch"
    )
    return 0


def cmd_eval(args) -> int:
    mask_lines = Path(args.mask).read_text(encoding="utf-8").split()
    labels = load_labels(args.labels, len(mask_lines))
    counts = confusion([int(v) for v in mask_lines], labels)
    record = metric_record(args.method, args.seed, counts)
    text = json.dumps(record, indent=2)
    print(text)
    if args.out is not None:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def cmd_synth(args) -> int:
    mix = {}
    for kind in ARTIFACT_KINDS:
        share = getattr(args, kind)
        if share > 0:
            mix[kind] = share
    spec = SyntheticSpec(
        n_channels=args.channels,
        duration_s=args.duration_s,
        rate_hz=args.rate,
        epoch_duration_s=args.epoch_duration,
        artifact_mix=mix,
        seed=args.seed,
    )
    recording, epochs = generate_synthetic(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_recording(recording, out_dir / "recording.csv")
    save_mask(epochs.labels, out_dir / "labels.txt")
    print(
        f"wrote {out_dir / 'recording.csv'} ({recording.n_channels} channels, "
        f"{recording.n_times} samples) and labels for {len(epochs)} epochs "
        f"({int(np.sum(epochs.labels))} artifacts)"
    )
    return 0


def cmd_export_review(args) -> int:
    recording, epochs = _load_inputs(args)
    config = _load_config(args, recording)
    if args.labels is not None:
        epochs = epochs.with_labels(load_labels(args.labels, len(epochs)))
    try:
        model = field_mod.fit_irpf(recording, epochs, config, args.sensitivity)
        report = field_mod.score_irpf(model, epochs)
    except TooFewCleanEpochs as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_FEW_CLEAN
    bundle = build_review_bundle(report, epochs, recording, config)
    Path(args.out).write_text(json.dumps(bundle) + "\n", encoding="utf-8")
    print(f"wrote review bundle for {len(epochs)} epochs to {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="potatofield",
        description="Automatic EEG artifact rejection with potato fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rej = sub.add_parser("reject", help="classify epochs and write a rejection mask")
    rej.add_argument("recording", help="CSV recording (header = channel names)")
    rej.add_argument("--rate", type=float, required=True, help="sampling rate in Hz")
    rej.add_argument("--duration", type=float, default=4.0, help="epoch duration in s")
    rej.add_argument("--method", choices=["irpf", "rpf", "rp"], default="irpf")
    rej.add_argument("--config", default=None, help="field config JSON")
    rej.add_argument("--out", required=True, help="mask output path")
    rej.add_argument("--report", default=None, help="SQI report JSON output path")
    rej.add_argument("--z-th", type=float, default=2.0, help="rp z threshold")
    rej.add_argument("--p-th", type=float, default=None, help="rpf p threshold")
    rej.add_argument("--u-lim", type=float, default=None, help="outlier gate upper limit")
    rej.add_argument("--sensitivity", type=float, default=1.5,
                     help="knee sensitivity scale (multiplied by sqrt(n))")
    rej.set_defaults(func=cmd_reject)

    ev = sub.add_parser("eval", help="compare a mask against ground-truth labels")
    ev.add_argument("--mask", required=True)
    ev.add_argument("--labels", required=True)
    ev.add_argument("--out", default=None, help="metric JSON output path")
    ev.add_argument("--method", default="unknown", help="method tag for the record")
    ev.add_argument("--seed", type=int, default=0, help="seed tag for the record")
    ev.set_defaults(func=cmd_eval)

    syn = sub.add_parser("synth", help="generate a labeled synthetic recording")
    syn.add_argument("--out-dir", required=True)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--channels", type=int, default=21)
    syn.add_argument("--rate", type=float, default=200.0)
    syn.add_argument("--duration-s", type=float, default=400.0)
    syn.add_argument("--epoch-duration", type=float, default=4.0)
    for kind in ARTIFACT_KINDS:
        syn.add_argument(f"--{kind}", type=float, default=0.0,
                         help=f"proportion of epochs with {kind} events")
    syn.set_defaults(func=cmd_synth)

    exp = sub.add_parser("export-review", help="write a review bundle JSON")
    exp.add_argument("recording")
    exp.add_argument("--rate", type=float, required=True)
    exp.add_argument("--duration", type=float, default=4.0)
    exp.add_argument("--config", default=None)
    exp.add_argument("--labels", default=None, help="optional ground-truth labels")
    exp.add_argument("--out", required=True)
    exp.add_argument("--u-lim", type=float, default=None)
    exp.add_argument("--sensitivity", type=float, default=1.5,
                     help="knee sensitivity scale (multiplied by sqrt(n))")
    exp.set_defaults(func=cmd_export_review)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TooFewCleanEpochs as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_FEW_CLEAN
    except (PotatoFieldError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
