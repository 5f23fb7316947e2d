"""Covariance estimation and geometry of symmetric positive definite matrices.

Epoch covariance matrices live on the SPD manifold. This module provides the
estimator, the affine-invariant Riemannian distance together with its two
Euclidean companions, matrix functions computed through eigendecomposition,
and the geometric (Karcher) mean obtained by fixed-point iteration.
"""

from __future__ import annotations

import warnings
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, EmptyInput, RankDeficient

# Eigenvalue floor applied when regularizing near-singular covariances:
# max(largest eigenvalue * REL_FLOOR, ABS_FLOOR).
REL_FLOOR = 1e-10
ABS_FLOOR = 1e-12


class DistanceKind(Enum):
    """Distance used between covariance matrices."""

    RIEMANNIAN = "riemannian"
    EUCLIDEAN = "euclidean"
    DIAG_EUCLIDEAN = "diag_euclidean"


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return the symmetric part (m + m.T) / 2."""
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def _eigh_apply(m: np.ndarray, fun) -> np.ndarray:
    """Apply a scalar function to the eigenvalues of a symmetric matrix."""
    w, v = np.linalg.eigh(symmetrize(m))
    return v @ np.diag(fun(w)) @ v.T


def sqrtm(sigma: np.ndarray) -> np.ndarray:
    """Principal square root of an SPD matrix."""
    return _eigh_apply(sigma, np.sqrt)


def inv_sqrt(sigma: np.ndarray) -> np.ndarray:
    """Unique symmetric inverse square root of an SPD matrix.

    Parameters
    ----------
    sigma : ndarray, shape (n, n)
        SPD matrix.

    Returns
    -------
    ndarray, shape (n, n)
        Matrix M such that M @ sigma @ M is the identity.
    """
    return _eigh_apply(sigma, lambda w: 1.0 / np.sqrt(w))


def logm(sigma: np.ndarray) -> np.ndarray:
    """Matrix logarithm of an SPD matrix."""
    return _eigh_apply(sigma, np.log)


def expm(sym: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix."""
    return _eigh_apply(sym, np.exp)


def regularize(sigma: np.ndarray) -> np.ndarray:
    """Floor the eigenvalues of a symmetric matrix to keep it SPD.

    Eigenvalues are floored at max(lambda_max * 1e-10, 1e-12), which keeps
    matrix logarithms finite on epochs with flat or dead channels.
    """
    w, v = np.linalg.eigh(symmetrize(sigma))
    floor = max(float(w[-1]) * REL_FLOOR, ABS_FLOOR)
    return v @ np.diag(np.maximum(w, floor)) @ v.T


def covariance(epoch_matrix: np.ndarray, apply_regularization: bool = True) -> np.ndarray:
    """Sample covariance matrix of one epoch.

    Parameters
    ----------
    epoch_matrix : ndarray, shape (n_channels, n_times)
        Band-pass filtered (hence centered) epoch.
    apply_regularization : bool, default True
        Floor the eigenvalues so the result is strictly positive definite.
        With regularization disabled a singular estimate raises
        ``RankDeficient``.

    Returns
    -------
    ndarray, shape (n_channels, n_channels)
        Symmetric positive definite covariance estimate X @ X.T / (T - 1).
    """
    x = np.asarray(epoch_matrix, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D epoch matrix, got shape {x.shape}")
    n, t = x.shape
    sigma = symmetrize(x @ x.T / (t - 1))
    if apply_regularization:
        return regularize(sigma)
    w = np.linalg.eigvalsh(sigma)
    floor = max(float(w[-1]) * REL_FLOOR, ABS_FLOOR)
    if w[0] < floor:
        raise RankDeficient(
            f"smallest eigenvalue {w[0]:.3e} below floor {floor:.3e}; "
            "flat or dead channel subset"
        )
    return sigma


def distance(a: np.ndarray, b: np.ndarray, kind: DistanceKind = DistanceKind.RIEMANNIAN) -> float:
    """Distance between two covariance matrices.

    Parameters
    ----------
    a, b : ndarray, shape (n, n)
        SPD matrices of matching dimension.
    kind : DistanceKind
        RIEMANNIAN: affine-invariant geodesic distance
        sqrt(sum_n log^2 l_n) with l_n the eigenvalues of
        a^{-1/2} b a^{-1/2}. EUCLIDEAN: Frobenius norm of (a - b).
        DIAG_EUCLIDEAN: Frobenius norm of diag(a - b).

    Returns
    -------
    float
        Non-negative distance.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"incompatible shapes {a.shape} and {b.shape}")
    if kind is DistanceKind.RIEMANNIAN:
        # Generalized eigenvalues of (b, a) equal those of a^{-1/2} b a^{-1/2}.
        ell = scipy.linalg.eigh(b, a, eigvals_only=True)
        ell = np.maximum(ell, ABS_FLOOR)
        return float(np.sqrt(np.sum(np.log(ell) ** 2)))
    if kind is DistanceKind.EUCLIDEAN:
        return float(np.linalg.norm(a - b, "fro"))
    if kind is DistanceKind.DIAG_EUCLIDEAN:
        return float(np.linalg.norm(np.diag(a) - np.diag(b)))
    raise ValueError(f"unknown distance kind: {kind!r}")


def geometric_mean(
    sigmas: "list[np.ndarray] | np.ndarray",
    tol: float = 1e-7,
    max_iter: int = 50,
) -> np.ndarray:
    """Geometric (Karcher) mean of a set of SPD matrices.

    The mean minimizes the sum of squared affine-invariant Riemannian
    distances. It is computed by fixed-point iteration: starting from the
    arithmetic mean, iterate G <- G^{1/2} exp(tau * M) G^{1/2} with
    M the mean of Log(G^{-1/2} Sigma_i G^{-1/2}). The step tau starts at 1
    and is halved whenever the gradient norm ||M||_F increases. Iteration
    stops once ||M||_F < tol.

    Parameters
    ----------
    sigmas : sequence of ndarray, shape (I, n, n)
        SPD matrices, at least one.
    tol : float
        Frobenius norm of the Riemannian gradient at convergence.
    max_iter : int
        Iteration cap; hitting it emits a RuntimeWarning and returns the
        best iterate seen.

    Returns
    -------
    ndarray, shape (n, n)
        The geometric mean.
    """
    stack = np.asarray(sigmas, dtype=float)
    if stack.ndim == 2:
        stack = stack[None]
    if stack.shape[0] == 0:
        raise EmptyInput("geometric_mean of an empty set")
    if stack.shape[-1] != stack.shape[-2]:
        raise DimensionMismatch(f"matrices are not square: {stack.shape}")
    if stack.shape[0] == 1:
        return stack[0].copy()

    g = symmetrize(stack.mean(axis=0))
    tau = 1.0
    prev_norm = np.inf
    best = g
    best_norm = np.inf
    for _ in range(max_iter):
        w, v = np.linalg.eigh(g)
        w = np.maximum(w, ABS_FLOOR)
        g_sqrt = (v * np.sqrt(w)) @ v.T
        g_isqrt = (v / np.sqrt(w)) @ v.T
        # Whitened matrices, batched eigendecomposition of the full stack.
        white = symmetrize(g_isqrt @ stack @ g_isqrt)
        ew, ev = np.linalg.eigh(white)
        ew = np.maximum(ew, ABS_FLOOR)
        logs = (ev * np.log(ew)[..., None, :]) @ np.swapaxes(ev, -1, -2)
        m = symmetrize(logs.mean(axis=0))
        norm = float(np.linalg.norm(m, "fro"))
        if norm < best_norm:
            best, best_norm = g, norm
        if norm < tol:
            return g
        if norm > prev_norm:
            tau *= 0.5
        prev_norm = norm
        g = symmetrize(g_sqrt @ expm(tau * m) @ g_sqrt)
    warnings.warn(
        f"geometric_mean: gradient norm {best_norm:.3e} after {max_iter} "
        "iterations; returning best iterate",
        RuntimeWarning,
        stacklevel=2,
    )
    return best
