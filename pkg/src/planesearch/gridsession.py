"""The zoomable-grid state machine over a search plane.

Each zoom level shows a resolution x resolution grid of candidate points
around the current grid center in plane-local (s, t) coordinates.  A click
re-centers the next, finer grid on the clicked cell; after the configured
number of levels the session completes and the clicked point becomes the
session's choice.  Cell coordinates are always recomputed from (s, t), so
there is no drift across levels.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import jsonio
from .errors import InvalidState, RejectedChoice, SimulationError
from .prefgp import PreferenceIntent
from .space import SearchSpace
from .subspace import Line, Plane, plane_points


@dataclass(frozen=True)
class GridSpec:
    """Grid shape: odd resolution, zoom depth, and per-level shrink factor."""

    resolution: int = 5
    levels: int = 4
    zoom_factor: float = 2.0

    def __post_init__(self):
        if self.resolution < 3 or self.resolution % 2 == 0:
            raise ValueError("resolution must be an odd integer >= 3")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if not self.zoom_factor > 1.0:
            raise ValueError("zoom_factor must exceed 1")

    @property
    def radius(self) -> int:
        return (self.resolution - 1) // 2

    def spacing(self, level: int) -> float:
        """Cell spacing h_level = h_0 / zoom^level with h_0 = 2/(resolution-1)."""
        return (2.0 / (self.resolution - 1)) / self.zoom_factor**level


@dataclass(frozen=True)
class Cell:
    """One clickable option: grid offsets, local coords, point, validity."""

    i: int
    j: int
    s: float
    t: float
    point: np.ndarray
    valid: bool


@dataclass(frozen=True)
class PlaneSession:
    """Zoom state over one plane.  ``choose`` returns the advanced session."""

    plane: Plane
    spec: GridSpec
    level: int = 0
    grid_center: tuple[float, float] = (0.0, 0.0)
    choices: tuple[tuple[int, int, int], ...] = ()
    chosen_point: np.ndarray | None = None

    @property
    def completed(self) -> bool:
        return self.level >= self.spec.levels

    def to_json(self) -> dict:
        return {
            "plane": self.plane.to_json(),
            "spec": {
                "resolution": self.spec.resolution,
                "levels": self.spec.levels,
                "zoom_factor": self.spec.zoom_factor,
            },
            "level": self.level,
            "grid_center": [self.grid_center[0], self.grid_center[1]],
            "choices": [[l, i, j] for (l, i, j) in self.choices],
        }

    def dumps(self) -> str:
        return jsonio.dumps(self.to_json())

    @classmethod
    def from_json(cls, doc: dict) -> "PlaneSession":
        spec = GridSpec(
            resolution=int(doc["spec"]["resolution"]),
            levels=int(doc["spec"]["levels"]),
            zoom_factor=float(doc["spec"]["zoom_factor"]),
        )
        session = cls(
            plane=Plane.from_json(doc["plane"]),
            spec=spec,
            level=int(doc["level"]),
            grid_center=(float(doc["grid_center"][0]), float(doc["grid_center"][1])),
            choices=tuple((int(l), int(i), int(j)) for l, i, j in doc["choices"]),
        )
        if session.completed:
            # a completing click re-centers the grid on the clicked cell, so
            # the stored center is exactly the chosen coordinate
            coord = np.array([[session.grid_center[0], session.grid_center[1]]])
            object.__setattr__(session, "chosen_point", plane_points(session.plane, coord)[0])
        return session


def grid_cells(session: PlaneSession) -> list[Cell]:
    """All cells of the current level, row-major from (-r, -r) to (r, r)."""
    if session.completed:
        raise InvalidState("session already completed")
    spec = session.spec
    r = spec.radius
    h = spec.spacing(session.level)
    s0, t0 = session.grid_center
    offsets = np.arange(-r, r + 1)
    ss = s0 + offsets * h
    tt = t0 + offsets * h
    coords = np.array([[s, t] for s in ss for t in tt])
    points = plane_points(session.plane, coords)
    space = SearchSpace(session.plane.n)
    valid = space.contains(points)
    cells = []
    k = 0
    for i in offsets:
        for j in offsets:
            cells.append(Cell(int(i), int(j), coords[k, 0], coords[k, 1], points[k], bool(valid[k])))
            k += 1
    return cells


def cell_at(session: PlaneSession, i: int, j: int) -> Cell:
    spec = session.spec
    r = spec.radius
    if not (-r <= i <= r and -r <= j <= r):
        raise ValueError(f"cell ({i}, {j}) outside the grid radius {r}")
    h = spec.spacing(session.level)
    s = session.grid_center[0] + i * h
    t = session.grid_center[1] + j * h
    point = plane_points(session.plane, np.array([[s, t]]))[0]
    valid = bool(SearchSpace(session.plane.n).contains(point))
    return Cell(int(i), int(j), s, t, point, valid)


def choose(session: PlaneSession, i: int, j: int) -> PlaneSession:
    """Advance one zoom level by clicking cell (i, j) of the current grid."""
    if session.completed:
        raise InvalidState("session already completed")
    cell = cell_at(session, i, j)
    if not cell.valid:
        raise RejectedChoice(f"cell ({i}, {j}) maps outside the design space")
    level = session.level + 1
    chosen = cell.point if level >= session.spec.levels else None
    return replace(
        session,
        level=level,
        grid_center=(cell.s, cell.t),
        choices=session.choices + ((session.level, int(i), int(j)),),
        chosen_point=chosen,
    )


def reachable_set_size(spec: GridSpec) -> int:
    """Number of distinct final (s, t) coordinates over all click sequences.

    Exhaustive: walks every distinct grid center per level and counts the
    distinct last-level cells, deduplicating coordinates at 1e-12.
    """
    r = spec.radius
    offsets = range(-r, r + 1)

    def key(s: float, t: float) -> tuple[int, int]:
        return (round(s / 1e-12), round(t / 1e-12))

    centers = {key(0.0, 0.0): (0.0, 0.0)}
    for level in range(spec.levels - 1):
        h = spec.spacing(level)
        nxt = {}
        for s0, t0 in centers.values():
            for i in offsets:
                for j in offsets:
                    s, t = s0 + i * h, t0 + j * h
                    nxt[key(s, t)] = (s, t)
        centers = nxt
    h = spec.spacing(spec.levels - 1)
    final = set()
    for s0, t0 in centers.values():
        for i in offsets:
            for j in offsets:
                final.add(key(s0 + i * h, t0 + j * h))
    return len(final)


def plane_preference_intent(
    plane: Plane, winner: np.ndarray, dedup_tol: float = 1e-10
) -> PreferenceIntent:
    """Choice record intent: the winner beats the plane representatives.

    Representatives are the plane center and the four (clipped) vertices;
    any of them matching the winner within ``dedup_tol`` is dropped, as are
    duplicates among themselves.
    """
    candidates = [plane.center, *plane.vertices()]
    losers: list[np.ndarray] = []
    for p in candidates:
        if np.max(np.abs(p - winner)) <= dedup_tol:
            continue
        if any(np.max(np.abs(p - q)) <= dedup_tol for q in losers):
            continue
        losers.append(p)
    return PreferenceIntent(winner=winner, losers=tuple(losers))


def finalize_preference(session: PlaneSession, dedup_tol: float = 1e-10) -> PreferenceIntent:
    """Preference intent of a completed session (chosen beats representatives)."""
    if not session.completed:
        raise InvalidState("session is not completed yet")
    return plane_preference_intent(session.plane, session.chosen_point, dedup_tol)


def simulate_plane_session(
    plane: Plane,
    spec: GridSpec,
    oracle,
    continuous: bool = False,
    continuous_lattice: int = 129,
) -> tuple[np.ndarray, PreferenceIntent]:
    """Play a session with a synthetic user that greedily maximizes ``oracle``.

    The default user clicks through the zoomable grid picking the valid
    cell with the highest oracle value at every level (ties resolve to the
    lowest row-major index).  With ``continuous=True`` the plane is instead
    sampled on a fine lattice, emulating a user who can pick any point.
    """
    if continuous:
        return _simulate_plane_continuous(plane, oracle, continuous_lattice)
    session = PlaneSession(plane, spec)
    while not session.completed:
        cells = grid_cells(session)
        best = None
        best_val = -np.inf
        for cell in cells:
            if not cell.valid:
                continue
            val = float(oracle(cell.point))
            if val > best_val:
                best = cell
                best_val = val
        if best is None:
            raise SimulationError("no valid cell at this level")
        session = choose(session, best.i, best.j)
    return session.chosen_point, finalize_preference(session)


def _simulate_plane_continuous(
    plane: Plane, oracle, lattice: int
) -> tuple[np.ndarray, PreferenceIntent]:
    axis = np.linspace(-1.0, 1.0, lattice)
    S, T = np.meshgrid(axis, axis, indexing="ij")
    coords = np.column_stack([S.ravel(), T.ravel()])
    points = plane_points(plane, coords)
    inside = SearchSpace(plane.n).contains(points)
    if not np.any(inside):
        raise SimulationError("no lattice point inside the design space")
    points = points[inside]
    vals = _evaluate_oracle(oracle, points)
    winner = points[int(np.argmax(vals))]
    return winner, plane_preference_intent(plane, winner)


@dataclass(frozen=True)
class LineSession:
    """Discretized line-search query; the baseline's counterpart of a grid."""

    line: Line
    samples: int = 1000
    chosen_point: np.ndarray | None = None

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("need at least two samples along the line")


def simulate_line_session(
    line: Line, samples: int, oracle
) -> tuple[np.ndarray, PreferenceIntent]:
    """Greedy synthetic user on a uniformly sampled line.

    Losers are the two endpoints (the incumbent and the acquisition
    maximizer), minus any duplicate of the winner.
    """
    if samples < 2:
        raise ValueError("need at least two samples along the line")
    t = np.arange(samples) / (samples - 1)
    points = line.at(t)
    vals = _evaluate_oracle(oracle, points)
    winner = points[int(np.argmax(vals))]
    losers = []
    for p in (line.start, line.end):
        if np.max(np.abs(p - winner)) > 1e-10:
            losers.append(p)
    return winner, PreferenceIntent(winner=winner, losers=tuple(losers))


def _evaluate_oracle(oracle, points: np.ndarray) -> np.ndarray:
    """Evaluate ``oracle`` on (m, n) points, batched when supported."""
    try:
        vals = np.asarray(oracle(points), dtype=float)
        if vals.shape == (points.shape[0],):
            return vals
    except Exception:
        pass
    return np.array([float(oracle(p)) for p in points])
