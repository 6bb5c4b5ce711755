"""Synthetic goodness functions and the simulated-user benchmark harness.

A trial replays the interactive loop with a synthetic function standing in
for the user: simulate the session on the current subspace, append the
implied preference record, refit the model, construct the next subspace.
Three methods are compared: line search (``sls``), plane search with
random planes (``sps-random``), and plane search with acquisition-driven
planes (``sps-bo``).
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .acquisition import AcquisitionConfig
from .errors import PlaneSearchError
from .gridsession import GridSpec, simulate_line_session, simulate_plane_session
from .jsonio import format_float
from .kernels import HyperPrior
from .prefgp import DEFAULT_BTL_SCALE, Dataset, best_point, map_fit
from .rng import stream
from .space import SearchSpace
from .subspace import Line, construct_line, construct_plane, initial_plane, random_plane

METHODS = ("sls", "sps-random", "sps-bo")
FUNCTION_KINDS = ("gaussian", "rosenbrock")
CSV_COLUMNS = (
    "method",
    "function",
    "dim",
    "trial",
    "seed",
    "iteration",
    "best_value",
    "optimality_gap",
    "error",
)

# rng stream ids within a trial
_STREAM_INIT = 0
_STREAM_ACQ = 1
_STREAM_PLANE = 2


def isotropic_gaussian(x, optimum: float = 0.3):
    """exp(-||x - x*||^2) with x* = (0.3, ..., 0.3).  Batch-aware."""
    x = np.asarray(x, dtype=float)
    sq = np.sum((x - optimum) ** 2, axis=-1)
    return np.exp(-sq)


def neg_scaled_rosenbrock(x):
    """Negated Rosenbrock, rescaled so the optimum sits at (0.25, ..., 0.25).

    g(x) = -sum_i [100 (4 x_{i+1} - 16 x_i^2)^2 + (1 - 4 x_i)^2], requiring
    at least two dimensions.  Maximum value 0.  Batch-aware.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise ValueError("the Rosenbrock function needs at least two dimensions")
    head = x[..., :-1]
    tail = x[..., 1:]
    terms = 100.0 * (4.0 * tail - 16.0 * head**2) ** 2 + (1.0 - 4.0 * head) ** 2
    return -np.sum(terms, axis=-1)


@dataclass(frozen=True)
class SyntheticFunction:
    """A benchmark goodness function with a known optimum."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        if self.kind == "rosenbrock" and self.n < 2:
            raise ValueError("the Rosenbrock function needs at least two dimensions")
        if self.n < 1:
            raise ValueError("dimension must be positive")

    @property
    def optimum_point(self) -> np.ndarray:
        return np.full(self.n, 0.3 if self.kind == "gaussian" else 0.25)

    @property
    def optimum_value(self) -> float:
        return 1.0 if self.kind == "gaussian" else 0.0

    def __call__(self, x):
        if self.kind == "gaussian":
            return isotropic_gaussian(x)
        return neg_scaled_rosenbrock(x)


@dataclass(frozen=True)
class TrialConfig:
    """Everything one simulated optimization run depends on."""

    method: str
    function: SyntheticFunction
    iterations: int
    seed: int
    grid: GridSpec = GridSpec()
    acquisition: AcquisitionConfig = AcquisitionConfig()
    best_mode: str = "posterior_mean"
    continuous_sim: bool = False
    line_samples: int = 1000
    prior: HyperPrior = HyperPrior()
    btl_scale: float = DEFAULT_BTL_SCALE

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class TrialResult:
    """Per-iteration best values and optimality gaps of one trial."""

    config: TrialConfig
    rows: list[tuple[int, float, float]] = field(default_factory=list)
    error: str | None = None
    error_iteration: int | None = None


class TrialError(PlaneSearchError):
    """A trial failed part-way; carries the partial result."""

    def __init__(self, message: str, result: TrialResult):
        super().__init__(message)
        self.result = result


def run_trial(config: TrialConfig) -> TrialResult:
    """Run one simulated optimization trial.  Deterministic given the seed.

    Fit or construction failures are raised as :class:`TrialError` with the
    iterations completed so far attached.
    """
    fn = config.function
    space = SearchSpace(fn.n)
    rng_init = stream(config.seed, _STREAM_INIT)
    rng_acq = stream(config.seed, _STREAM_ACQ)
    rng_plane = stream(config.seed, _STREAM_PLANE)

    dataset = Dataset(space)
    result = TrialResult(config)
    if config.method == "sls":
        subspace = Line(space.center, space.uniform(rng_init))
    else:
        subspace = initial_plane(space, rng_init)

    for iteration in range(1, config.iterations + 1):
        try:
            if config.method == "sls":
                _, intent = simulate_line_session(subspace, config.line_samples, fn)
            else:
                _, intent = simulate_plane_session(
                    subspace, config.grid, fn, continuous=config.continuous_sim
                )
            dataset.add_preference(intent)
            model = map_fit(dataset, config.prior, config.btl_scale)
            best_value = float(np.max(fn(dataset.points_matrix())))
            result.rows.append((iteration, best_value, fn.optimum_value - best_value))
            if config.method == "sps-bo":
                subspace = construct_plane(
                    model, config.acquisition, rng_plane, config.best_mode
                )
            elif config.method == "sps-random":
                subspace = random_plane(best_point(model, config.best_mode), rng_plane)
            else:
                subspace = construct_line(
                    model, config.acquisition, rng_acq, config.best_mode
                )
        except PlaneSearchError as exc:
            result.error = f"{type(exc).__name__}: {exc}"
            result.error_iteration = iteration
            raise TrialError(
                f"trial failed (method={config.method}, function={fn.kind}, "
                f"dim={fn.n}, seed={config.seed}, iteration={iteration}): {exc}",
                result,
            ) from exc
    return result


def _trial_rows(method: str, fn: SyntheticFunction, trial: int, result: TrialResult) -> list[dict]:
    rows = []
    for iteration, best_value, gap in result.rows:
        rows.append({
            "method": method,
            "function": fn.kind,
            "dim": fn.n,
            "trial": trial,
            "seed": result.config.seed,
            "iteration": iteration,
            "best_value": best_value,
            "optimality_gap": gap,
            "error": "",
        })
    if result.error is not None:
        rows.append({
            "method": method,
            "function": fn.kind,
            "dim": fn.n,
            "trial": trial,
            "seed": result.config.seed,
            "iteration": result.error_iteration,
            "best_value": "",
            "optimality_gap": "",
            "error": result.error,
        })
    return rows


def _limit_blas_threads() -> None:
    # trial matrices are small; BLAS threading only adds contention
    import threadpoolctl

    threadpoolctl.threadpool_limits(1)


def _run_trial_guarded(config: TrialConfig) -> TrialResult:
    try:
        return run_trial(config)
    except TrialError as exc:
        return exc.result


def run_experiment(
    methods,
    functions,
    trials: int,
    iterations: int,
    base_seed: int,
    grid: GridSpec = GridSpec(),
    acquisition: AcquisitionConfig = AcquisitionConfig(),
    best_mode: str = "posterior_mean",
    continuous_sim: bool = False,
    n_jobs: int = 1,
) -> list[dict]:
    """Run trials for every (method, function) pair and collect CSV rows.

    Trial ``t`` uses seed ``base_seed + t``.  Failed trials contribute the
    rows they completed plus one row with the error column set; the run
    continues.  Output ordering is fixed (method, function, dim, trial,
    iteration) regardless of scheduling, so parallel runs are byte-identical
    to sequential ones.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    methods = list(methods)
    functions = list(functions)
    jobs: list[tuple[str, SyntheticFunction, int, TrialConfig]] = []
    for method in methods:
        for fn in functions:
            for trial in range(trials):
                config = TrialConfig(
                    method=method,
                    function=fn,
                    iterations=iterations,
                    seed=base_seed + trial,
                    grid=grid,
                    acquisition=acquisition,
                    best_mode=best_mode,
                    continuous_sim=continuous_sim,
                )
                jobs.append((method, fn, trial, config))

    if n_jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=n_jobs, initializer=_limit_blas_threads
        ) as pool:
            results = list(pool.map(_run_trial_guarded, [j[3] for j in jobs], chunksize=1))
    else:
        _limit_blas_threads()
        results = [_run_trial_guarded(j[3]) for j in jobs]

    rows: list[dict] = []
    for (method, fn, trial, _), result in zip(jobs, results):
        rows.extend(_trial_rows(method, fn, trial, result))
    rows.sort(key=lambda r: (r["method"], r["function"], r["dim"], r["trial"], r["iteration"]))
    return rows


def rows_to_csv(rows) -> str:
    """Serialize experiment rows; floats carry 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([
            row["method"],
            row["function"],
            row["dim"],
            row["trial"],
            row["seed"],
            row["iteration"],
            format_float(row["best_value"]) if row["best_value"] != "" else "",
            format_float(row["optimality_gap"]) if row["optimality_gap"] != "" else "",
            row["error"],
        ])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in csv.DictReader(fh):
            rows.append({
                "method": raw["method"],
                "function": raw["function"],
                "dim": int(raw["dim"]),
                "trial": int(raw["trial"]),
                "seed": int(raw["seed"]),
                "iteration": int(raw["iteration"]),
                "best_value": float(raw["best_value"]) if raw["best_value"] else "",
                "optimality_gap": float(raw["optimality_gap"]) if raw["optimality_gap"] else "",
                "error": raw["error"],
            })
    return rows


def gaps_at_iteration(rows, iteration: int) -> dict:
    """Per (function, dim, method) arrays of gaps at one iteration.

    Rows flagged with an error are excluded.
    """
    out: dict = {}
    for row in rows:
        if row["iteration"] != iteration or row["error"] or row["optimality_gap"] == "":
            continue
        key = (row["function"], row["dim"])
        out.setdefault(key, {}).setdefault(row["method"], []).append(row["optimality_gap"])
    return {
        key: {m: np.asarray(v) for m, v in methods.items()} for key, methods in out.items()
    }
