"""Ground-truth evaluation: confusion counts, derived metrics, effect size.

Artifact is the positive class throughout: recall is the proportion of
artifact epochs correctly rejected, specificity the proportion of clean
epochs correctly retained. Metrics with a zero denominator are reported as
None and excluded from averages, never coerced to 0 or 1.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import LengthMismatch, ZeroVariance

METRIC_NAMES = ("recall", "specificity", "precision", "f1")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    """recall/specificity/precision/f1 in [0, 1], or None when undefined."""

    recall: float | None
    specificity: float | None
    precision: float | None
    f1: float | None


def _as_bool_mask(values) -> np.ndarray:
    return np.asarray([bool(int(v)) for v in values], dtype=bool)


def confusion(predicted, truth) -> ConfusionCounts:
    """Confusion counts with Artifact (1/True) as the positive class."""
    pred = _as_bool_mask(predicted)
    true = _as_bool_mask(truth)
    if pred.shape != true.shape:
        raise LengthMismatch(f"{pred.size} predictions for {true.size} labels")
    return ConfusionCounts(
        tp=int(np.sum(pred & true)),
        fp=int(np.sum(pred & ~true)),
        tn=int(np.sum(~pred & ~true)),
        fn=int(np.sum(~pred & true)),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def metrics(c: ConfusionCounts) -> MetricSet:
    """Derive the four metrics; zero denominators yield None."""
    recall = _ratio(c.tp, c.tp + c.fn)
    specificity = _ratio(c.tn, c.tn + c.fp)
    precision = _ratio(c.tp, c.tp + c.fp)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return MetricSet(recall, specificity, precision, f1)


def cohens_d(a, b) -> float:
    """Standardized mean difference with an (n - 1)-weighted pooled SD."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("cohens_d needs at least two values per group")
    pooled_var = (
        (a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)
    ) / (a.size + b.size - 2)
    if pooled_var <= 0:
        raise ZeroVariance("pooled standard deviation is zero")
    return float((a.mean() - b.mean()) / np.sqrt(pooled_var))


def effect_size_label(d: float) -> str:
    """Conventional interpretation bands for |d|: 0.2 / 0.5 / 0.8."""
    magnitude = abs(d)
    if magnitude < 0.2:
        return "very small"
    if magnitude < 0.5:
        return "small"
    if magnitude < 0.8:
        return "medium"
    return "large"


def metric_record(method: str, seed: int, counts: ConfusionCounts) -> dict:
    """One JSON-ready evaluation record."""
    record = {"method": method, "seed": seed, **asdict(counts)}
    record.update(asdict(metrics(counts)))
    return record


def write_metric_records(records: list[dict], path) -> None:
    Path(path).write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )


def mean_metrics(records: list[dict]) -> dict[str, float | None]:
    """Per-metric mean over records, skipping undefined (None) entries."""
    out: dict[str, float | None] = {}
    for name in METRIC_NAMES:
        values = [r[name] for r in records if r.get(name) is not None]
        out[name] = float(np.mean(values)) if values else None
    return out


def write_summary_csv(records: list[dict], path) -> None:
    """Aggregate CSV: one row per method, mean of each defined metric."""
    methods = sorted({r["method"] for r in records})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "n", *METRIC_NAMES])
        for method in methods:
            subset = [r for r in records if r["method"] == method]
            means = mean_metrics(subset)
            writer.writerow(
                [method, len(subset)]
                + [
                    "" if means[name] is None else f"{means[name]:.4f}"
                    for name in METRIC_NAMES
                ]
            )
