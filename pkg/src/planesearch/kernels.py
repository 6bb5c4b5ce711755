"""ARD Matern 5/2 covariance and its hyperparameter derivatives.

The kernel is

    k(x, y) = a * (1 + sqrt(5)*r + 5*r^2/3) * exp(-sqrt(5)*r),
    r^2     = sum_k (x_k - y_k)^2 / theta_k^2,

with signal variance ``a`` and one length scale ``theta_k`` per input
dimension.  Log-space derivatives are provided for the MAP fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class KernelHyperparams:
    """Signal variance and per-dimension length scales."""

    amplitude: float
    length_scales: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "length_scales", np.asarray(self.length_scales, dtype=float))
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise ValueError(f"amplitude must be positive, got {self.amplitude!r}")
        if self.length_scales.ndim != 1 or not np.all(np.isfinite(self.length_scales)):
            raise ValueError("length_scales must be a finite 1-D array")
        if not np.all(self.length_scales > 0):
            raise ValueError("every length scale must be positive")

    @property
    def n(self) -> int:
        return self.length_scales.shape[0]


@dataclass(frozen=True)
class HyperPrior:
    """Log-normal priors on the kernel hyperparameters.

    ``median_*`` are the prior medians of the parameters themselves, i.e.
    log(param) ~ Normal(log(median), log_variance).
    """

    median_amplitude: float = 0.2
    median_length_scale: float = 0.5
    log_variance: float = 0.01

    def __post_init__(self):
        for name in ("median_amplitude", "median_length_scale", "log_variance"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")

    def initial_hyperparams(self, n: int) -> KernelHyperparams:
        return KernelHyperparams(self.median_amplitude, np.full(n, self.median_length_scale))

    def log_density(self, value: float, median: float) -> float:
        """Log-density of a log-normal with the given median at ``value``."""
        s2 = self.log_variance
        z = math.log(value) - math.log(median)
        return -math.log(value) - 0.5 * math.log(2.0 * math.pi * s2) - z * z / (2.0 * s2)

    def log_density_grad_wrt_log(self, value: float, median: float) -> float:
        """d/d(log value) of :meth:`log_density`."""
        return -1.0 - (math.log(value) - math.log(median)) / self.log_variance


def _scaled_sq_dists(X: np.ndarray, Y: np.ndarray, length_scales: np.ndarray) -> np.ndarray:
    """Pairwise r^2 between rows of X and Y under per-dimension scaling."""
    Xs = X / length_scales
    Ys = Y / length_scales
    # ||x - y||^2 = ||x||^2 + ||y||^2 - 2 x.y, floored at 0 against cancellation
    sq = (
        np.sum(Xs * Xs, axis=1)[:, None]
        + np.sum(Ys * Ys, axis=1)[None, :]
        - 2.0 * (Xs @ Ys.T)
    )
    return np.maximum(sq, 0.0)


def _matern52(r2: np.ndarray, amplitude: float) -> np.ndarray:
    r = np.sqrt(r2)
    return amplitude * (1.0 + SQRT5 * r + (5.0 / 3.0) * r2) * np.exp(-SQRT5 * r)


def kernel(x, y, hyperparams: KernelHyperparams) -> float:
    """Covariance between two points.  Symmetric, in (0, amplitude]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (hyperparams.n,) or y.shape != (hyperparams.n,):
        raise ValueError(
            f"points must have shape ({hyperparams.n},), got {x.shape} and {y.shape}"
        )
    d = (x - y) / hyperparams.length_scales
    r2 = float(d @ d)
    if r2 == 0.0:
        return float(hyperparams.amplitude)
    return float(_matern52(np.asarray(r2), hyperparams.amplitude))


def kernel_matrix(X: np.ndarray, hyperparams: KernelHyperparams) -> np.ndarray:
    """Gram matrix K(X, X) with exact ``amplitude`` on the diagonal."""
    r2 = _scaled_sq_dists(X, X, hyperparams.length_scales)
    K = _matern52(r2, hyperparams.amplitude)
    np.fill_diagonal(K, hyperparams.amplitude)
    return K

def kernel_cross(X: np.ndarray, Y: np.ndarray, hyperparams: KernelHyperparams) -> np.ndarray:
    """Cross-covariances K(X, Y) of shape (len(X), len(Y))."""
    r2 = _scaled_sq_dists(X, Y, hyperparams.length_scales)
    return _matern52(r2, hyperparams.amplitude)


def kernel_matrix_with_grads(
    X: np.ndarray, hyperparams: KernelHyperparams
) -> tuple[np.ndarray, np.ndarray]:
    """Gram matrix plus derivatives w.r.t. each log length scale.

    Returns ``(K, dK)`` where ``dK[k] = d K / d log(theta_k)``.  The
    derivative w.r.t. log amplitude is K itself and is not materialized.
    """
    ls = hyperparams.length_scales
    r2 = _scaled_sq_dists(X, X, ls)
    r = np.sqrt(r2)
    decay = np.exp(-SQRT5 * r)
    K = hyperparams.amplitude * (1.0 + SQRT5 * r + (5.0 / 3.0) * r2) * decay
    np.fill_diagonal(K, hyperparams.amplitude)
    # dk/d log(theta_k) = (5/3) * a * (1 + sqrt5 r) * exp(-sqrt5 r) * d_k^2 / theta_k^2
    common = (5.0 / 3.0) * hyperparams.amplitude * (1.0 + SQRT5 * r) * decay
    n = ls.shape[0]
    dK = np.empty((n, X.shape[0], X.shape[0]))
    for k in range(n):
        diff = (X[:, k, None] - X[None, :, k]) / ls[k]
        dK[k] = common * (diff * diff)
    return K, dK
