"""The normalized design space [0, 1]^n and point validation helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Slack for containment checks.  Boundary clipping produces coordinates that
# land on 0 or 1 only up to one rounding error, so exact comparisons would
# misclassify points that are on the boundary by construction.
CONTAINMENT_TOL = 1e-12


@dataclass(frozen=True)
class SearchSpace:
    """The unit hypercube [0, 1]^n that all design parameters live in."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"dimensionality must be a positive integer, got {self.n!r}")

    @property
    def center(self) -> np.ndarray:
        return np.full(self.n, 0.5)

    def validate_point(self, x, name: str = "point") -> np.ndarray:
        """Coerce ``x`` to a float vector of the right length, or raise ValueError."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"{name} has shape {x.shape}, expected ({self.n},)")
        if not np.all(np.isfinite(x)):
            raise ValueError(f"{name} has non-finite coordinates")
        return x

    def contains(self, x, tol: float = CONTAINMENT_TOL):
        """Membership test.  Accepts a single point or an (m, n) batch."""
        x = np.asarray(x, dtype=float)
        return np.all((x >= -tol) & (x <= 1.0 + tol), axis=-1)

    def clamp(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def uniform(self, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
        """Draw one point (or ``count`` points) uniformly from the space."""
        if count is None:
            return rng.uniform(0.0, 1.0, self.n)
        return rng.uniform(0.0, 1.0, (count, self.n))
