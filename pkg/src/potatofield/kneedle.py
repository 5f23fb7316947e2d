"""Knee detection on sorted value curves (the Kneedle procedure).

Used in two places: deciding how many low-p epochs to trim while fitting a
robust barycenter, and picking the rejection threshold on the sorted SQI
curve. Both call sites pass ascending curves, so only the increasing
direction is handled; convex curves are rotated into the concave canonical
form before the difference curve is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewPoints

MIN_POINTS = 5


@dataclass(frozen=True)
class KneeResult:
    """Detected knee: position in the input sequence and the value there.

    Both fields are None when no knee survives the sensitivity threshold.
    """

    index: int | None
    value: float | None


def find_knee(values, sensitivity: float = 1.0, shape: str = "auto") -> KneeResult:
    """Locate the knee of a non-decreasing curve.

    The Kneedle procedure: (1) min-max normalize positions and values to
    [0, 1]; (2) classify the curve as concave or convex against the chord
    (sign of the mean of y - x) and rotate convex curves into the concave
    increasing canonical form; (3) form the difference curve D = y - x;
    (4) take the local maxima of D lying above the chord as knee candidates;
    (5) a candidate is confirmed when the curve later drops below its
    threshold T = D_candidate - sensitivity * (mean consecutive x spacing).
    The confirmed candidate with the largest difference value wins, earliest
    index on ties.

    Parameters
    ----------
    values : array-like of float
        Sorted ascending, at least five points (caller sorts).
    sensitivity : float
        Larger values demand a deeper drop after the candidate, yielding
        fewer detections.
    shape : {"auto", "concave", "convex"}
        Curve shape against the chord. "auto" classifies by the sign of
        the mean of (y - x); callers that know which reading they need
        (e.g. elbow of a low block) may force it.

    Returns
    -------
    KneeResult
        Index into ``values`` and the value there, or (None, None).
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or y.size < MIN_POINTS:
        raise TooFewPoints(f"need at least {MIN_POINTS} points, got {y.size}")
    n = y.size
    y_range = y[-1] - y[0]
    if y_range <= 0:
        return KneeResult(None, None)  # constant curve has no knee

    x_norm = np.arange(n, dtype=float) / (n - 1)
    y_norm = (y - y[0]) / y_range

    if shape == "auto":
        flipped = np.mean(y_norm - x_norm) < 0
    elif shape == "convex":
        flipped = True
    elif shape == "concave":
        flipped = False
    else:
        raise ValueError(f"unknown shape {shape!r}")
    if flipped:
        # Rotate the convex increasing curve by 180 degrees.
        y_canon = (1.0 - y_norm)[::-1]
    else:
        y_canon = y_norm
    diff = y_canon - x_norm

    spacing = 1.0 / (n - 1)
    margin = sensitivity * spacing

    # suffix_min[i] = min(diff[i:]), so a candidate at i is confirmed exactly
    # when the curve later drops below its threshold.
    suffix_min = np.minimum.accumulate(diff[::-1])[::-1]
    best = -1
    for i in range(1, n - 1):
        if diff[i] > 0 and diff[i] >= diff[i - 1] and diff[i] >= diff[i + 1]:
            if suffix_min[i + 1] < diff[i] - margin and (best < 0 or diff[i] > diff[best]):
                best = i  # maximal confirmed candidate; earliest wins ties
    if best < 0:
        return KneeResult(None, None)
    knee = (n - 1 - best) if flipped else best
    return KneeResult(int(knee), float(y[knee]))
