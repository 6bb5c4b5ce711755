"""Two-dimensional search planes and one-dimensional search lines.

A plane is a rhombus: center ``c`` plus half-diagonals ``u`` and ``v``
(orthogonal by construction), with vertices ``c + u``, ``c - alpha_u * u``,
``c + v``, ``c - alpha_v * v``.  The ``alpha`` factors shrink the negative
half-diagonals where they would leave the design space; in
``mask_outside`` mode nothing is shrunk and out-of-space grid cells are
simply flagged invalid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import jsonio
from .errors import ConstructionFailure
from .optim import maximize_with_restarts
from .prefgp import FittedModel, best_point, posterior
from .space import SearchSpace

BOUNDARY_MODES = ("scale_half_diagonal", "mask_outside")
DEGENERATE_U_NORM = 1e-6
FALLBACK_U_LENGTH = 0.1
DEFAULT_ORTHO_WEIGHT = 1000.0


@dataclass(frozen=True)
class Plane:
    """Rhombus subspace P(c, u, v) with boundary-clipping scale factors."""

    center: np.ndarray
    u: np.ndarray
    v: np.ndarray
    neg_u_scale: float = 1.0
    neg_v_scale: float = 1.0
    boundary_mode: str = "scale_half_diagonal"

    def __post_init__(self):
        for name in ("center", "u", "v"):
            vec = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, vec)
            if vec.ndim != 1 or not np.all(np.isfinite(vec)):
                raise ValueError(f"{name} must be a finite 1-D vector")
        if not (self.center.shape == self.u.shape == self.v.shape):
            raise ValueError("center, u, v must share one dimension")
        for name in ("neg_u_scale", "neg_v_scale"):
            s = getattr(self, name)
            if not (0.0 <= s <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {s!r}")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary_mode {self.boundary_mode!r}")

    @property
    def n(self) -> int:
        return self.center.shape[0]

    def vertices(self) -> np.ndarray:
        """The four rhombus vertices, clipped sides included."""
        c, u, v = self.center, self.u, self.v
        return np.array([
            c + u,
            c - self.neg_u_scale * u,
            c + v,
            c - self.neg_v_scale * v,
        ])

    def to_json(self) -> dict:
        return {
            "c": list(self.center),
            "u": list(self.u),
            "v": list(self.v),
            "alpha_u": self.neg_u_scale,
            "alpha_v": self.neg_v_scale,
            "mode": self.boundary_mode,
        }

    def dumps(self) -> str:
        return jsonio.dumps(self.to_json())

    @classmethod
    def from_json(cls, doc: dict) -> "Plane":
        return cls(
            center=np.asarray(doc["c"], dtype=float),
            u=np.asarray(doc["u"], dtype=float),
            v=np.asarray(doc["v"], dtype=float),
            neg_u_scale=float(doc["alpha_u"]),
            neg_v_scale=float(doc["alpha_v"]),
            boundary_mode=str(doc["mode"]),
        )


@dataclass(frozen=True)
class Line:
    """Segment from the incumbent to the acquisition maximizer."""

    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        for name in ("start", "end"):
            vec = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, vec)
            if vec.ndim != 1 or not np.all(np.isfinite(vec)):
                raise ValueError(f"{name} must be a finite 1-D vector")
        if self.start.shape != self.end.shape:
            raise ValueError("endpoints must share one dimension")

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (1.0 - t)[..., None] * self.start + t[..., None] * self.end


def _half_diag_factors(coords: np.ndarray, neg_scale: float, scaled: bool) -> np.ndarray:
    if not scaled:
        return coords
    return np.where(coords >= 0.0, coords, neg_scale * coords)


def plane_points(plane: Plane, coords: np.ndarray) -> np.ndarray:
    """Map plane-local (s, t) rows to design-space points.

    In ``scale_half_diagonal`` mode negative local coordinates contract by
    the corresponding alpha; in ``mask_outside`` mode the map is the plain
    affine one and results may leave the design space.
    """
    coords = np.asarray(coords, dtype=float)
    scaled = plane.boundary_mode == "scale_half_diagonal"
    fs = _half_diag_factors(coords[..., 0], plane.neg_u_scale, scaled)
    ft = _half_diag_factors(coords[..., 1], plane.neg_v_scale, scaled)
    return plane.center + fs[..., None] * plane.u + ft[..., None] * plane.v


def plane_point(plane: Plane, s: float, t: float) -> np.ndarray:
    return plane_points(plane, np.array([[s, t]]))[0]


def _max_scale_along(c: np.ndarray, d: np.ndarray, limit: float = 1.0) -> float:
    """Largest step in [0, limit] keeping ``c + step * d`` inside [0, 1]^n."""
    step = limit
    for k in range(c.shape[0]):
        if d[k] > 0.0:
            step = min(step, max((1.0 - c[k]) / d[k], 0.0))
        elif d[k] < 0.0:
            step = min(step, max(c[k] / -d[k], 0.0))
    return max(step, 0.0)


def clip_negative_vertices(plane: Plane, space: SearchSpace) -> Plane:
    """Shrink the negative half-diagonals to the design-space boundary.

    Requires the positive-u and positive-v vertices to already be feasible.
    In ``mask_outside`` mode the plane is returned unchanged.
    """
    if plane.boundary_mode == "mask_outside":
        return plane
    alpha_u = _max_scale_along(plane.center, -plane.u)
    alpha_v = _max_scale_along(plane.center, -plane.v)
    return replace(plane, neg_u_scale=alpha_u, neg_v_scale=alpha_v)


def _random_orthonormal_pair(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    while True:
        a = rng.standard_normal(n)
        b = rng.standard_normal(n)
        na = np.linalg.norm(a)
        if na < 1e-12:
            continue
        a = a / na
        b = b - (a @ b) * a
        nb = np.linalg.norm(b)
        if nb < 1e-12:
            continue
        return a, b / nb


def initial_plane(
    space: SearchSpace, rng: np.random.Generator, half_extent: float = 0.5
) -> Plane:
    """Randomly oriented square centered at the middle of the design space.

    ``half_extent <= 0.5`` keeps every vertex inside the space for any
    orientation, so no clipping is ever needed.
    """
    if not 0.0 < half_extent <= 0.5:
        raise ValueError("half_extent must lie in (0, 0.5]")
    a, b = _random_orthonormal_pair(rng, space.n)
    return Plane(space.center, half_extent * a, half_extent * b)


def random_plane(
    x_plus,
    rng: np.random.Generator,
    boundary_mode: str = "scale_half_diagonal",
) -> Plane:
    """Baseline constructor: unit-length orthogonal half-diagonals, random direction."""
    x_plus = np.asarray(x_plus, dtype=float)
    n = x_plus.shape[0]
    if n < 2:
        raise ValueError("random planes need at least two dimensions")
    u, v = _random_orthonormal_pair(rng, n)
    if boundary_mode == "scale_half_diagonal":
        u = u * _max_scale_along(x_plus, u)
        v = v * _max_scale_along(x_plus, v)
    plane = Plane(x_plus, u, v, boundary_mode=boundary_mode)
    return clip_negative_vertices(plane, SearchSpace(n))


def _random_feasible_direction(
    rng: np.random.Generator, c: np.ndarray, length: float
) -> np.ndarray:
    """Uniform-direction vector of at most ``length`` with ``c + u`` feasible."""
    for _ in range(128):
        d = rng.standard_normal(c.shape[0])
        nd = np.linalg.norm(d)
        if nd < 1e-12:
            continue
        u = (length / nd) * d
        scale = _max_scale_along(c, u)
        if scale > 1e-9:
            return scale * u
    raise ConstructionFailure("could not find a feasible fallback direction")


def construct_plane(
    model: FittedModel,
    config,
    rng: np.random.Generator,
    best_mode: str = "posterior_mean",
    ortho_weight: float = DEFAULT_ORTHO_WEIGHT,
) -> Plane:
    """Acquisition-driven plane construction.

    The center is the incumbent, one half-diagonal reaches the global EI
    maximizer, and the other maximizes the plane-averaged EI subject to a
    soft orthogonality penalty, followed by an exact projection so the
    rhombus invariant holds to machine precision.
    """
    from .acquisition import ei_values, lattice_local_coords, maximize_ei

    space = model.space
    c = best_point(model, best_mode)
    x_ei = maximize_ei(model, config, rng, best_mode)
    u = x_ei - c
    if np.linalg.norm(u) < DEGENERATE_U_NORM:
        u = _random_feasible_direction(rng, c, FALLBACK_U_LENGTH)

    mu_best, _ = posterior(model, c)
    coords = lattice_local_coords(config.lattice_side)
    base = c + coords[:, 0][:, None] * u  # (L, n); the t*v part varies per candidate
    ts = coords[:, 1]
    m_lattice = coords.shape[0]

    def objective(V: np.ndarray) -> np.ndarray:
        pts = base[None, :, :] + ts[None, :, None] * V[:, None, :]
        pts = np.clip(pts, 0.0, 1.0)
        ei = ei_values(model, pts.reshape(-1, space.n), mu_best)
        mean_ei = ei.reshape(V.shape[0], m_lattice).mean(axis=1)
        return mean_ei - ortho_weight * (V @ u) ** 2

    bound = np.maximum(np.minimum(c, 1.0 - c), 0.0)
    starts = [rng.uniform(-bound, bound) for _ in range(config.restarts)]
    v, value = maximize_with_restarts(
        objective,
        starts,
        list(zip(-bound, bound)),
        config.max_iterations,
        config.gradient_step,
    )
    if v is None or not np.isfinite(value):
        raise ConstructionFailure("no restart produced a finite plane objective")

    # Exact orthogonality, then pull the positive-v vertex back into the
    # space if the projection nudged it out.
    v = v - ((u @ v) / (u @ u)) * u
    v = v * min(_max_scale_along(c, v), _max_scale_along(c, -v), 1.0)
    return clip_negative_vertices(Plane(c, u, v), space)


def construct_line(
    model: FittedModel,
    config,
    rng: np.random.Generator,
    best_mode: str = "posterior_mean",
) -> Line:
    """Baseline subspace: the segment from the incumbent to the EI maximizer."""
    from .acquisition import maximize_ei

    return Line(best_point(model, best_mode), maximize_ei(model, config, rng, best_mode))
