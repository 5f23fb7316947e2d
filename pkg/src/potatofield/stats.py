"""Dispersion statistics, z-scores and p-value combination.

Distances of epoch covariances to a barycenter are right-skewed, so potatoes
describe them with geometric statistics (log-domain mean and standard
deviation); the classical arithmetic pair is kept for the plain-potato
baseline. z-scores convert to one-sided normal p-values, and the p-values of
a whole field are merged by one of four combination functions or by a
meta-combination of two of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .errors import EmptyInput, NonPositiveDistance, OutOfRangeP

# Clamping bounds keeping log(p) and the normal quantile of p finite.
P_MIN = 1e-300
P_MAX = 1.0 - 1e-16

# Below this value of log(sigma) (or sigma, in arithmetic mode) the fit is
# treated as degenerate: zero dispersion carries no evidence of abnormality.
DEGENERATE_EPS = 1e-12


class StatsMode(Enum):
    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"


class CombinerKind(Enum):
    FISHER = "fisher"
    LIPTAK = "liptak"
    PEARSON = "pearson"
    TIPPETT = "tippett"
    META_TIPPETT_OVER_LIPTAK_FISHER = "meta_tippett_over_liptak_fisher"


@dataclass(frozen=True)
class DispersionStats:
    """Center and spread of a set of distances.

    In geometric mode ``mu`` is the geometric mean exp(mean(log d)) and
    ``sigma`` the geometric standard deviation exp(sqrt(mean(log^2(d/mu)))),
    so sigma >= 1. In arithmetic mode they are the sample mean and the
    (I - 1)-divisor standard deviation.
    """

    mu: float
    sigma: float
    mode: StatsMode


def fit_dispersion(distances, mode: StatsMode = StatsMode.GEOMETRIC) -> DispersionStats:
    """Fit dispersion statistics to a list of distances.

    Parameters
    ----------
    distances : array-like of float
        Non-empty; strictly positive in geometric mode.
    mode : StatsMode
        Geometric (log-domain) or arithmetic statistics.
    """
    d = np.asarray(distances, dtype=float)
    if d.size == 0:
        raise EmptyInput("fit_dispersion of an empty list")
    if mode is StatsMode.GEOMETRIC:
        if np.any(d <= 0):
            raise NonPositiveDistance("geometric statistics require d > 0")
        logs = np.log(d)
        log_mu = logs.mean()
        log_sigma = np.sqrt(np.mean((logs - log_mu) ** 2))
        return DispersionStats(float(np.exp(log_mu)), float(np.exp(log_sigma)), mode)
    mu = float(d.mean())
    sigma = float(d.std(ddof=1)) if d.size > 1 else 0.0
    return DispersionStats(mu, sigma, mode)


def z_score(d, stats: DispersionStats):
    """z-score of a distance under fitted dispersion statistics.

    Geometric mode: log(d / mu) / log(sigma); arithmetic: (d - mu) / sigma.
    A degenerate fit (all training distances equal) returns 0 for any input.
    Accepts a scalar or an ndarray of distances.
    """
    d = np.asarray(d, dtype=float)
    if stats.mode is StatsMode.GEOMETRIC:
        log_sigma = np.log(stats.sigma)
        if log_sigma < DEGENERATE_EPS:
            z = np.zeros_like(d)
        else:
            z = np.log(d / stats.mu) / log_sigma
    else:
        if stats.sigma < DEGENERATE_EPS:
            z = np.zeros_like(d)
        else:
            z = (d - stats.mu) / stats.sigma
    return float(z) if z.ndim == 0 else z


def z_to_p(z):
    """One-sided upper-tail normal p-value, p = 1 - cdf_N(0,1)(z).

    Clamped to [1e-300, 1 - 1e-16] so that log(p) and the normal quantile
    stay finite. Accepts a scalar or an ndarray.
    """
    p = np.clip(special.ndtr(-np.asarray(z, dtype=float)), P_MIN, P_MAX)
    return float(p) if p.ndim == 0 else p


def _check_rows(p: np.ndarray) -> None:
    if p.shape[-1] == 0:
        raise EmptyInput("combine of an empty p-value list")
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise OutOfRangeP("p-values must lie strictly inside (0, 1)")


def combine_rows(
    p_values: np.ndarray,
    kind: CombinerKind,
    liptak_printed_form: bool = False,
) -> np.ndarray:
    """Combine p-values row-wise; (m, J) input yields m combined p-values.

    Fisher:  q = -2 sum log p_j,       p = 1 - cdf_chi2(2J)(q)
    Pearson: q = -2 sum log(1 - p_j),  p = cdf_chi2(2J)(q)
    Tippett: q = min p_j,              p = 1 - (1 - q)^J
    Liptak:  q = sum ndtri(p_j)/sqrt(J), p = cdf_N(0,1)(q)
    Meta:    Tippett applied to {Liptak, Fisher} of the same row.

    ``liptak_printed_form`` switches Liptak to q = sum ndtri(p_j)/J with
    p = 1 - cdf_N(0,1)(q); that variant is inverted with respect to the
    other combiners and is kept for compatibility only.
    """
    p = np.atleast_2d(np.asarray(p_values, dtype=float))
    _check_rows(p)
    j = p.shape[-1]
    if kind is CombinerKind.FISHER:
        q = -2.0 * np.sum(np.log(p), axis=-1)
        out = special.chdtrc(2 * j, q)
    elif kind is CombinerKind.PEARSON:
        q = -2.0 * np.sum(np.log1p(-p), axis=-1)
        out = special.chdtr(2 * j, q)
    elif kind is CombinerKind.TIPPETT:
        q = np.min(p, axis=-1)
        out = -np.expm1(j * np.log1p(-q))
    elif kind is CombinerKind.LIPTAK:
        if liptak_printed_form:
            q = np.sum(special.ndtri(p), axis=-1) / j
            out = special.ndtr(-q)
        else:
            q = np.sum(special.ndtri(p), axis=-1) / np.sqrt(j)
            out = special.ndtr(q)
    elif kind is CombinerKind.META_TIPPETT_OVER_LIPTAK_FISHER:
        sub = np.stack(
            [
                combine_rows(p, CombinerKind.LIPTAK),
                combine_rows(p, CombinerKind.FISHER),
            ],
            axis=-1,
        )
        out = combine_rows(sub, CombinerKind.TIPPETT)
    else:
        raise ValueError(f"unknown combiner kind: {kind!r}")
    return np.clip(out, P_MIN, P_MAX)


def combine(
    p_values,
    kind: CombinerKind,
    liptak_printed_form: bool = False,
) -> float:
    """Combine a list of p-values into one; see ``combine_rows``."""
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1:
        raise EmptyInput(f"combine expects a 1-D list of p-values, got shape {p.shape}")
    return float(combine_rows(p, kind, liptak_printed_form)[0])
