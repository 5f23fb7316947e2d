"""A single potato: barycenter fitting, robust trimming, epoch scoring.

A potato is an acceptance region around a barycenter of epoch covariance
matrices, restricted to a channel subset and frequency band. The simple fit
uses every epoch; the adaptive fit iteratively trims the epochs whose
p-values fall below a knee detected on the sorted p-value curve, up to four
barycenter fits in total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spd
from .errors import DimensionMismatch, TooFewEpochs
from .kneedle import find_knee
from .signal_io import Label
from .spd import DistanceKind
from .stats import DispersionStats, StatsMode, fit_dispersion, z_score, z_to_p

# Geometric statistics need d > 0: exact-center distances are floored at
# this fraction of mu once stats exist, and at an absolute floor before.
REL_D_FLOOR = 1e-12
ABS_D_FLOOR = 1e-300

MIN_EPOCHS_SIMPLE = 2
MIN_EPOCHS_ADAPTIVE = 5
# Hard floor on surviving epochs during robust trimming.
MIN_SURVIVORS = 5
MAX_FITS_ADAPTIVE = 4
# Knee sensitivity at the trimming call site is this scale times sqrt(n),
# tracking the sqrt(n) fluctuation scale of sorted-statistic curves so the
# false-detection rate stays flat across epoch counts.
DEFAULT_KNEE_SCALE = 1.5


def knee_sensitivity(n: int, scale: float = DEFAULT_KNEE_SCALE) -> float:
    """Sensitivity passed to find_knee for an n-point sorted curve."""
    return scale * float(np.sqrt(n))


@dataclass(frozen=True)
class PotatoModel:
    """Fitted potato: barycenter, geometric dispersion stats, provenance."""

    barycenter: np.ndarray
    stats: DispersionStats
    distance_kind: DistanceKind
    channels: tuple[str, ...] = ()
    band: tuple[float, float | None] = (0.0, None)
    kept_mask: np.ndarray | None = None
    n_fit_iterations: int = 1


def _distances(covs: np.ndarray, barycenter: np.ndarray, kind: DistanceKind) -> np.ndarray:
    return np.array([spd.distance(c, barycenter, kind) for c in covs])


def _barycenter(covs: np.ndarray, kind: DistanceKind) -> np.ndarray:
    """Dispersion minimizer under the potato's metric.

    Geometric mean for the Riemannian distance; arithmetic mean for the
    Euclidean kinds, which is the Frechet mean under those metrics.
    """
    if kind is DistanceKind.RIEMANNIAN:
        return spd.geometric_mean(covs)
    return spd.symmetrize(np.mean(covs, axis=0))


def _fit_stats(covs: np.ndarray, kind: DistanceKind) -> tuple[np.ndarray, DispersionStats, np.ndarray]:
    center = _barycenter(covs, kind)
    d = np.maximum(_distances(covs, center, kind), ABS_D_FLOOR)
    return center, fit_dispersion(d, StatsMode.GEOMETRIC), d


def fit_simple(
    covs,
    distance_kind: DistanceKind = DistanceKind.RIEMANNIAN,
    channels: tuple[str, ...] = (),
    band: tuple[float, float | None] = (0.0, None),
) -> PotatoModel:
    """Fit a potato on all epochs, no trimming (plain-potato semantics)."""
    covs = np.asarray(covs, dtype=float)
    if covs.shape[0] < MIN_EPOCHS_SIMPLE:
        raise TooFewEpochs(f"need at least {MIN_EPOCHS_SIMPLE} covariances, got {covs.shape[0]}")
    center, stats, _ = _fit_stats(covs, distance_kind)
    return PotatoModel(
        barycenter=center,
        stats=stats,
        distance_kind=distance_kind,
        channels=channels,
        band=band,
        kept_mask=np.ones(covs.shape[0], dtype=bool),
        n_fit_iterations=1,
    )


def fit_adaptive(
    covs,
    distance_kind: DistanceKind = DistanceKind.RIEMANNIAN,
    channels: tuple[str, ...] = (),
    band: tuple[float, float | None] = (0.0, None),
    knee_scale: float = DEFAULT_KNEE_SCALE,
) -> PotatoModel:
    """Fit a potato with adaptive knee-based outlier trimming.

    Each round fits barycenter and geometric statistics on the kept epochs,
    converts their z-scores to p-values, and looks for a knee on the
    ascending-sorted p curve. A knee at sorted position k trims the k + 1
    lowest-p epochs (the farthest from the barycenter). The loop performs at
    most four barycenter fits and never trims the kept set below five
    epochs; once trimmed, an epoch never re-enters.
    """
    covs = np.asarray(covs, dtype=float)
    n = covs.shape[0]
    if n < MIN_EPOCHS_ADAPTIVE:
        raise TooFewEpochs(f"need at least {MIN_EPOCHS_ADAPTIVE} covariances, got {n}")
    kept = np.arange(n)
    center, stats, d = _fit_stats(covs, distance_kind)
    fits = 1
    while fits < MAX_FITS_ADAPTIVE:
        p = z_to_p(z_score(np.maximum(d, REL_D_FLOOR * stats.mu), stats))
        order = np.argsort(p, kind="stable")
        knee = find_knee(p[order], knee_sensitivity(kept.size, knee_scale))
        if knee.index is None:
            break
        n_drop = knee.index + 1
        if kept.size - n_drop < MIN_SURVIVORS:
            break
        kept = np.delete(kept, order[:n_drop])
        center, stats, d = _fit_stats(covs[kept], distance_kind)
        fits += 1
    mask = np.zeros(n, dtype=bool)
    mask[kept] = True
    return PotatoModel(
        barycenter=center,
        stats=stats,
        distance_kind=distance_kind,
        channels=channels,
        band=band,
        kept_mask=mask,
        n_fit_iterations=fits,
    )


def fit_fixed_trim(
    covs,
    distance_kind: DistanceKind = DistanceKind.RIEMANNIAN,
    z_threshold: float = 2.0,
    n_iterations: int = 3,
    channels: tuple[str, ...] = (),
    band: tuple[float, float | None] = (0.0, None),
) -> PotatoModel:
    """Robust fit with a fixed z-score trimming rule (field-potato baseline).

    Performs at most ``n_iterations`` barycenter fits, excluding after each
    non-final fit every epoch with z above ``z_threshold``. Same survivor
    floor as the adaptive fit.
    """
    covs = np.asarray(covs, dtype=float)
    n = covs.shape[0]
    if n < MIN_EPOCHS_ADAPTIVE:
        raise TooFewEpochs(f"need at least {MIN_EPOCHS_ADAPTIVE} covariances, got {n}")
    kept = np.arange(n)
    center, stats, d = _fit_stats(covs, distance_kind)
    fits = 1
    while fits < n_iterations:
        z = z_score(np.maximum(d, REL_D_FLOOR * stats.mu), stats)
        drop = np.flatnonzero(z > z_threshold)
        if drop.size == 0 or kept.size - drop.size < MIN_SURVIVORS:
            break
        kept = np.delete(kept, drop)
        center, stats, d = _fit_stats(covs[kept], distance_kind)
        fits += 1
    mask = np.zeros(n, dtype=bool)
    mask[kept] = True
    return PotatoModel(
        barycenter=center,
        stats=stats,
        distance_kind=distance_kind,
        channels=channels,
        band=band,
        kept_mask=mask,
        n_fit_iterations=fits,
    )


def score(model: PotatoModel, cov: np.ndarray) -> tuple[float, float]:
    """Score one covariance: distance to the barycenter, z, p.

    Distances are floored at REL_D_FLOOR * mu so that an exact-center epoch
    maps to the most negative finite z (p near 1) instead of a log of zero.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.shape != model.barycenter.shape:
        raise DimensionMismatch(
            f"covariance shape {cov.shape} vs barycenter {model.barycenter.shape}"
        )
    d = spd.distance(cov, model.barycenter, model.distance_kind)
    d = max(d, REL_D_FLOOR * model.stats.mu, ABS_D_FLOOR)
    z = z_score(d, model.stats)
    return z, z_to_p(z)


def score_many(model: PotatoModel, covs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``score`` over a stack of covariances."""
    d = _distances(np.asarray(covs, dtype=float), model.barycenter, model.distance_kind)
    d = np.maximum(d, max(REL_D_FLOOR * model.stats.mu, ABS_D_FLOOR))
    z = z_score(d, model.stats)
    return z, z_to_p(z)


def rp_classify(model: PotatoModel, cov: np.ndarray, z_th: float = 2.0) -> Label:
    """Plain-potato decision: Artifact iff z strictly exceeds the threshold."""
    z, _ = score(model, cov)
    return Label.ARTIFACT if z > z_th else Label.CLEAN
