"""Expected improvement for points and planes, and its global maximization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .optim import maximize_with_restarts
from .prefgp import FittedModel, best_point, posterior
from .subspace import Plane, plane_points

# sigma^2 below this fraction of the prior variance is indistinguishable
# from the jitter left at observed points and is treated as exactly zero,
# which is what makes EI vanish at already-observed points.
SIGMA2_REL_FLOOR = 1e-8

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class AcquisitionConfig:
    """Knobs for acquisition maximization and plane averaging."""

    restarts: int = 10
    max_iterations: int = 200
    gradient_step: float = 1e-5
    lattice_side: int = 5

    def __post_init__(self):
        if self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("restarts and max_iterations must be positive")
        if self.gradient_step <= 0:
            raise ValueError("gradient_step must be positive")
        if self.lattice_side < 1 or self.lattice_side % 2 == 0:
            raise ValueError("lattice_side must be a positive odd integer")


def ei_closed_form(mu, sigma, mu_best: float):
    """sigma * (gamma * Phi(gamma) + phi(gamma)) with gamma = (mu - mu_best) / sigma.

    Zero wherever sigma <= 0.  Vectorized over mu and sigma.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    mu, sigma = np.broadcast_arrays(mu, sigma)
    out = np.zeros(mu.shape)
    pos = sigma > 0
    diff = mu[pos] - mu_best
    with np.errstate(over="ignore"):  # denormal sigma: gamma saturates to +-inf
        gamma = diff / sigma[pos]
    # distributing sigma keeps the gamma -> +inf limit exact at mu - mu_best
    phi = _INV_SQRT_2PI * np.exp(-0.5 * np.clip(gamma, -40.0, 40.0) ** 2)
    out[pos] = diff * ndtr(gamma) + sigma[pos] * phi
    return np.maximum(out, 0.0)


def ei_values(model: FittedModel, X: np.ndarray, mu_best: float) -> np.ndarray:
    """EI at a batch of points, with the small-variance floor applied."""
    mu, sigma2 = posterior(model, X)
    floor = SIGMA2_REL_FLOOR * model.hyperparams.amplitude
    sigma = np.sqrt(np.where(sigma2 > floor, sigma2, 0.0))
    return ei_closed_form(mu, sigma, mu_best)


def expected_improvement(model: FittedModel, x, x_plus) -> float:
    """Expected gain of ``x`` over the incumbent ``x_plus``.  Nonnegative."""
    x = model.space.validate_point(x, "x")
    x_plus = model.space.validate_point(x_plus, "x_plus")
    mu_best, _ = posterior(model, x_plus)
    return float(ei_values(model, x[None, :], mu_best)[0])


def maximize_ei(
    model: FittedModel,
    config: AcquisitionConfig,
    rng: np.random.Generator,
    best_mode: str = "posterior_mean",
) -> np.ndarray:
    """Global EI maximizer over the design space.

    Runs ``config.restarts`` bounded quasi-Newton ascents from uniform
    starts plus one from the incumbent perturbed by uniform noise of
    radius 0.05, and returns the best final iterate.
    """
    n = model.space.n
    x_plus = best_point(model, best_mode)
    mu_best, _ = posterior(model, x_plus)

    starts = [s for s in rng.uniform(0.0, 1.0, (config.restarts, n))]
    starts.append(np.clip(x_plus + rng.uniform(-0.05, 0.05, n), 0.0, 1.0))

    x, _ = maximize_with_restarts(
        lambda X: ei_values(model, X, mu_best),
        starts,
        [(0.0, 1.0)] * n,
        config.max_iterations,
        config.gradient_step,
    )
    return x


def lattice_local_coords(side: int) -> np.ndarray:
    """The side x side plane-local lattice over [-1, 1]^2, row-major."""
    axis = np.linspace(-1.0, 1.0, side)
    S, T = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([S.ravel(), T.ravel()])


def plane_acquisition(
    model: FittedModel, plane: Plane, x_plus, config: AcquisitionConfig
) -> float:
    """Mean EI over the plane's local lattice.

    Lattice points falling outside the design space are clamped in
    coordinate-wise before evaluation.
    """
    coords = lattice_local_coords(config.lattice_side)
    P = np.clip(plane_points(plane, coords), 0.0, 1.0)
    mu_best, _ = posterior(model, x_plus)
    return float(np.mean(ei_values(model, P, mu_best)))
