"""Gaussian-process preference model.

Latent goodness values are inferred from "winner beats losers" choice
records: a Bradley-Terry-Luce likelihood links observed choices to the
latent values, a zero-mean GP prior with the ARD Matern 5/2 kernel ties
values at nearby points together, and log-normal hyperpriors regularize
the kernel hyperparameters.  Fitting maximizes the joint posterior over
latent values and log hyperparameters with a bounded quasi-Newton run,
polished by exact Newton steps on the (concave) latent subproblem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize

from . import jsonio
from .errors import FitFailure, InvalidState
from .kernels import HyperPrior, KernelHyperparams, kernel_cross, kernel_matrix, kernel_matrix_with_grads
from .space import SearchSpace

DEFAULT_BTL_SCALE = 0.01
DEFAULT_DEDUP_TOL = 1e-10
JITTER_REL = 1e-8
_LOG_BOUND = math.log(1e6)


@dataclass(frozen=True)
class PreferenceRecord:
    """One observed choice: the winner beats every loser."""

    winner: int
    losers: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "losers", tuple(int(i) for i in self.losers))
        object.__setattr__(self, "winner", int(self.winner))
        if not self.losers:
            raise ValueError("a preference record needs at least one loser")
        if self.winner in self.losers:
            raise ValueError("winner cannot appear among the losers")
        if len(set(self.losers)) != len(self.losers):
            raise ValueError("losers must be distinct")


@dataclass(frozen=True)
class PreferenceIntent:
    """A choice expressed as raw points, before dataset indices exist."""

    winner: np.ndarray
    losers: tuple[np.ndarray, ...]


class Dataset:
    """Observed points plus the choice records among them.

    Points are deduplicated on insertion: anything within ``dedup_tolerance``
    (max-norm) of an existing point reuses that point's index.
    """

    def __init__(self, space: SearchSpace, dedup_tolerance: float = DEFAULT_DEDUP_TOL):
        if dedup_tolerance <= 0:
            raise ValueError("dedup_tolerance must be positive")
        self.space = space
        self.dedup_tolerance = float(dedup_tolerance)
        self._points: list[np.ndarray] = []
        self._records: list[PreferenceRecord] = []

    def __len__(self) -> int:
        return len(self._points)

    @property
    def points(self) -> list[np.ndarray]:
        return list(self._points)

    @property
    def records(self) -> list[PreferenceRecord]:
        return list(self._records)

    def points_matrix(self) -> np.ndarray:
        if not self._points:
            return np.empty((0, self.space.n))
        return np.array(self._points)

    def copy(self) -> "Dataset":
        out = Dataset(self.space, self.dedup_tolerance)
        out._points = list(self._points)
        out._records = list(self._records)
        return out

    def find_point(self, x: np.ndarray) -> int | None:
        for i, p in enumerate(self._points):
            if np.max(np.abs(p - x)) <= self.dedup_tolerance:
                return i
        return None

    def add_point(self, x) -> int:
        """Insert a point (or return the index of its duplicate)."""
        x = self.space.validate_point(x)
        if not self.space.contains(x):
            raise ValueError(f"point {x} lies outside the design space")
        existing = self.find_point(x)
        if existing is not None:
            return existing
        self._points.append(x.copy())
        return len(self._points) - 1

    def add_record(self, winner: int, losers) -> PreferenceRecord:
        record = PreferenceRecord(winner, tuple(losers))
        for idx in (record.winner, *record.losers):
            if not 0 <= idx < len(self._points):
                raise ValueError(f"record index {idx} out of range")
        self._records.append(record)
        return record

    def add_preference(self, intent: PreferenceIntent) -> PreferenceRecord | None:
        """Resolve an intent to indices and append the record.

        Losers that coincide with the winner (after deduplication) are
        dropped; if none survive the record carries no information and
        ``None`` is returned.
        """
        winner = self.add_point(intent.winner)
        losers: list[int] = []
        for p in intent.losers:
            idx = self.add_point(p)
            if idx != winner and idx not in losers:
                losers.append(idx)
        if not losers:
            return None
        return self.add_record(winner, losers)

    def to_json(self) -> dict:
        return {
            "n": self.space.n,
            "points": [list(p) for p in self._points],
            "records": [
                {"winner": r.winner, "losers": list(r.losers)} for r in self._records
            ],
        }

    def dumps(self) -> str:
        return jsonio.dumps(self.to_json())

    @classmethod
    def from_json(cls, doc: dict, dedup_tolerance: float = DEFAULT_DEDUP_TOL) -> "Dataset":
        ds = cls(SearchSpace(int(doc["n"])), dedup_tolerance)
        for p in doc["points"]:
            x = ds.space.validate_point(p)
            ds._points.append(x)
        for r in doc["records"]:
            ds.add_record(int(r["winner"]), [int(i) for i in r["losers"]])
        return ds

    @classmethod
    def from_string(cls, text: str, dedup_tolerance: float = DEFAULT_DEDUP_TOL) -> "Dataset":
        return cls.from_json(jsonio.loads(text), dedup_tolerance)


def btl_log_likelihood(record: PreferenceRecord, g, scale: float) -> float:
    """Log-probability of the record's winner under the choice model.

    P(winner) = exp(g_w / s) / sum_{j in {w} u losers} exp(g_j / s),
    evaluated with max-subtraction so large value gaps stay finite.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    g = np.asarray(g, dtype=float)
    idx = np.array((record.winner, *record.losers))
    if np.any(idx >= g.shape[0]) or np.any(idx < 0):
        raise ValueError("record indices out of range for the goodness vector")
    vals = g[idx] / scale
    m = np.max(vals)
    return float(vals[0] - m - math.log(np.sum(np.exp(vals - m))))


@dataclass(frozen=True)
class FittedModel:
    """Immutable result of a MAP fit, ready for posterior queries."""

    dataset: Dataset
    hyperparams: KernelHyperparams
    latent_goodness: np.ndarray
    kernel_matrix_factor: np.ndarray  # lower Cholesky factor of K + jitter*I
    btl_scale: float
    jitter: float
    points: np.ndarray = field(repr=False, default=None)
    alpha: np.ndarray = field(repr=False, default=None)  # (K + jitter*I)^{-1} g
    scaled_points: np.ndarray = field(repr=False, default=None)
    scaled_sqnorms: np.ndarray = field(repr=False, default=None)
    fit_objective: float = float("nan")
    fit_grad_max_norm: float = float("nan")

    @property
    def space(self) -> SearchSpace:
        return self.dataset.space

    def posterior(self, x) -> tuple:
        return posterior(self, x)


def build_model(
    dataset: Dataset,
    hyperparams: KernelHyperparams,
    latent_goodness,
    btl_scale: float = DEFAULT_BTL_SCALE,
    jitter: float | None = None,
    fit_objective: float = float("nan"),
    fit_grad_max_norm: float = float("nan"),
) -> FittedModel:
    """Assemble a model from explicit values (used by the fit and by tests)."""
    g = np.asarray(latent_goodness, dtype=float)
    if g.shape != (len(dataset),):
        raise ValueError("latent_goodness length must match the dataset")
    if jitter is None:
        jitter = JITTER_REL * hyperparams.amplitude
    X = dataset.points_matrix()
    C = kernel_matrix(X, hyperparams) + jitter * np.eye(len(dataset))
    L = np.linalg.cholesky(C)
    alpha = cho_solve((L, True), g, check_finite=False)
    scaled = X / hyperparams.length_scales
    return FittedModel(
        dataset=dataset,
        hyperparams=hyperparams,
        latent_goodness=g,
        kernel_matrix_factor=L,
        btl_scale=float(btl_scale),
        jitter=float(jitter),
        points=X,
        alpha=alpha,
        scaled_points=scaled,
        scaled_sqnorms=np.einsum("ij,ij->i", scaled, scaled),
        fit_objective=fit_objective,
        fit_grad_max_norm=fit_grad_max_norm,
    )


class _PackedRecords:
    """Record index sets padded to a rectangle for vectorized likelihoods.

    Rows are canonically ordered so the floating-point summation order, and
    with it the fit, is invariant under relabeling of the records.
    """

    def __init__(self, records):
        self.records = tuple(sorted(records, key=lambda r: (r.winner, r.losers)))
        width = max(1 + len(r.losers) for r in self.records)
        self.idx = np.zeros((len(self.records), width), dtype=int)
        self.mask = np.zeros((len(self.records), width), dtype=bool)
        for row, r in enumerate(self.records):
            members = (r.winner, *r.losers)
            self.idx[row, : len(members)] = members
            self.mask[row, : len(members)] = True
        self.winners = np.array([r.winner for r in self.records])


def _btl_value_and_grad(packed: _PackedRecords, g: np.ndarray, scale: float):
    """Total choice log-likelihood, its gradient, and the member probabilities."""
    vals = np.where(packed.mask, g[packed.idx] / scale, -np.inf)
    m = np.max(vals, axis=1)
    e = np.exp(vals - m[:, None])
    Z = np.sum(e, axis=1)
    total = float(np.sum(vals[:, 0] - m - np.log(Z)))
    P = e / Z[:, None]
    grad = np.zeros_like(g)
    np.add.at(grad, packed.idx[packed.mask], -P[packed.mask] / scale)
    np.add.at(grad, packed.winners, 1.0 / scale)
    return total, grad, P


def _btl_hessian(packed: _PackedRecords, P: np.ndarray, scale: float, N: int) -> np.ndarray:
    """Negative Hessian of the choice log-likelihood (positive semidefinite)."""
    H = np.zeros((N, N))
    s2 = scale * scale
    for row in range(P.shape[0]):
        members = packed.idx[row][packed.mask[row]]
        p = P[row][packed.mask[row]]
        block = (np.diag(p) - np.outer(p, p)) / s2
        H[np.ix_(members, members)] += block
    return H


def map_objective_and_grad(
    z: np.ndarray,
    X: np.ndarray,
    records,
    prior: HyperPrior,
    btl_scale: float,
    optimize_hyperparams: bool = True,
    fixed_hyperparams: KernelHyperparams | None = None,
    jitter_abs: float | None = None,
) -> tuple[float, np.ndarray]:
    """Joint MAP objective (to maximize) and its gradient.

    ``z`` packs the latent values followed, when hyperparameters are being
    optimized, by ``log amplitude`` and the ``log length scales``.
    """
    packed = records if isinstance(records, _PackedRecords) else _PackedRecords(records)
    N, n = X.shape
    g = z[:N]
    if optimize_hyperparams:
        log_a = z[N]
        log_ls = z[N + 1:]
        h = KernelHyperparams(math.exp(log_a), np.exp(log_ls))
    else:
        h = fixed_hyperparams
    jitter = JITTER_REL * h.amplitude if jitter_abs is None else jitter_abs

    if optimize_hyperparams:
        K, dK = kernel_matrix_with_grads(X, h)
    else:
        K = kernel_matrix(X, h)
    C = K + jitter * np.eye(N)
    L = np.linalg.cholesky(C)
    alpha = cho_solve((L, True), g, check_finite=False)

    ll, ll_grad, _ = _btl_value_and_grad(packed, g, btl_scale)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    prior_term = -0.5 * float(g @ alpha) - 0.5 * logdet - 0.5 * N * math.log(2.0 * math.pi)

    value = ll + prior_term
    grad = np.empty_like(z)
    grad[:N] = ll_grad - alpha

    if optimize_hyperparams:
        value += prior.log_density(h.amplitude, prior.median_amplitude)
        for t in h.length_scales:
            value += prior.log_density(t, prior.median_length_scale)

        Cinv = cho_solve((L, True), np.eye(N), check_finite=False)
        # d/d log(a): the whole of C scales with the amplitude when the
        # jitter is relative, only K when it is absolute.
        dC_a = C if jitter_abs is None else K
        grad[N] = (
            0.5 * float(alpha @ (dC_a @ alpha))
            - 0.5 * float(np.sum(Cinv * dC_a))
            + prior.log_density_grad_wrt_log(h.amplitude, prior.median_amplitude)
        )
        for k in range(n):
            grad[N + 1 + k] = (
                0.5 * float(alpha @ (dK[k] @ alpha))
                - 0.5 * float(np.sum(Cinv * dK[k]))
                + prior.log_density_grad_wrt_log(h.length_scales[k], prior.median_length_scale)
            )
    return value, grad


def map_fit(
    dataset: Dataset,
    prior: HyperPrior | None = None,
    btl_scale: float = DEFAULT_BTL_SCALE,
    jitter: float | None = None,
    optimize_hyperparams: bool = True,
) -> FittedModel:
    """Jointly MAP-estimate latent goodness values and kernel hyperparameters.

    Deterministic: always starts from zero latent values and the prior
    medians.  The returned model's objective gradient has max-norm at most
    1e-4; a non-finite objective along the way raises :class:`FitFailure`
    with the last finite iterate attached.
    """
    if prior is None:
        prior = HyperPrior()
    if len(dataset) < 2:
        raise ValueError("need at least two observed points to fit")
    records = dataset.records
    if not records:
        raise ValueError("need at least one preference record to fit")

    X = dataset.points_matrix()
    N, n = X.shape
    fixed = prior.initial_hyperparams(n)
    if optimize_hyperparams:
        z0 = np.concatenate([
            np.zeros(N),
            [math.log(prior.median_amplitude)],
            np.full(n, math.log(prior.median_length_scale)),
        ])
        bounds = [(None, None)] * N + [(-_LOG_BOUND, _LOG_BOUND)] * (n + 1)
    else:
        z0 = np.zeros(N)
        bounds = [(None, None)] * N

    packed = _PackedRecords(records)
    last_finite = {"z": z0.copy()}

    def objective(z):
        try:
            value, grad = map_objective_and_grad(
                z, X, packed, prior, btl_scale, optimize_hyperparams, fixed, jitter
            )
        except np.linalg.LinAlgError as exc:
            raise FitFailure(
                f"kernel matrix factorization failed: {exc}", last_finite["z"]
            ) from exc
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            raise FitFailure(
                "non-finite objective during MAP optimization", last_finite["z"]
            )
        last_finite["z"] = z.copy()
        return value, grad

    def negated(z):
        value, grad = objective(z)
        return -value, -grad

    z = z0
    value = -math.inf
    grad_norm = math.inf
    # The latent block is stiff (curvature up to 1/jitter), so the joint
    # quasi-Newton run alternates with an exact Newton polish of the latent
    # values, which are a concave subproblem at fixed hyperparameters.  The
    # loop ends once the joint gradient cap holds.
    for _ in range(8):
        res = minimize(
            negated,
            z,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 400, "maxfun": 1200, "ftol": 1e-14, "gtol": 1e-6},
        )
        z = res.x
        z = _newton_polish_latent(
            z, X, packed, prior, btl_scale, optimize_hyperparams, fixed, jitter, objective
        )
        value, grad = objective(z)
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm <= 1e-4:
            break

    g = z[:N]
    if optimize_hyperparams:
        h = KernelHyperparams(math.exp(z[N]), np.exp(z[N + 1:]))
    else:
        h = fixed
    return build_model(
        dataset,
        h,
        g,
        btl_scale=btl_scale,
        jitter=jitter,
        fit_objective=value,
        fit_grad_max_norm=grad_norm,
    )


def _newton_polish_latent(
    z: np.ndarray,
    X: np.ndarray,
    packed: _PackedRecords,
    prior: HyperPrior,
    btl_scale: float,
    optimize_hyperparams: bool,
    fixed: KernelHyperparams | None,
    jitter_abs: float | None,
    objective,
) -> np.ndarray:
    """Damped Newton steps on the latent values at fixed hyperparameters."""
    N = X.shape[0]
    if optimize_hyperparams:
        h = KernelHyperparams(math.exp(z[N]), np.exp(z[N + 1:]))
    else:
        h = fixed
    jitter = JITTER_REL * h.amplitude if jitter_abs is None else jitter_abs
    C = kernel_matrix(X, h) + jitter * np.eye(N)
    L = np.linalg.cholesky(C)
    Cinv = cho_solve((L, True), np.eye(N), check_finite=False)

    z = z.copy()
    value, _ = objective(z)
    for _ in range(25):
        g = z[:N]
        _, ll_grad, P = _btl_value_and_grad(packed, g, btl_scale)
        grad_g = ll_grad - Cinv @ g
        if np.max(np.abs(grad_g)) <= 1e-6:
            break
        H = _btl_hessian(packed, P, btl_scale, N) + Cinv
        try:
            step = np.linalg.solve(H, grad_g)
        except np.linalg.LinAlgError:
            break
        # Backtrack until the objective does not decrease.
        t = 1.0
        improved = False
        for _ in range(40):
            trial = z.copy()
            trial[:N] = g + t * step
            trial_value, _ = objective(trial)
            if trial_value >= value:
                z = trial
                value = trial_value
                improved = True
                break
            t *= 0.5
        if not improved:
            break
    return z


def _kernel_cross_cached(model: FittedModel, X: np.ndarray) -> np.ndarray:
    """K(points, X) reusing the model's pre-scaled training points."""
    from .kernels import _matern52

    Ys = X / model.hyperparams.length_scales
    sq = (
        model.scaled_sqnorms[:, None]
        + np.einsum("ij,ij->i", Ys, Ys)[None, :]
        - 2.0 * (model.scaled_points @ Ys.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return _matern52(sq, model.hyperparams.amplitude)


def posterior(model: FittedModel, x):
    """Posterior mean and (clamped) variance of the latent goodness.

    Accepts a single point of shape (n,) or a batch of shape (m, n); the
    return is scalar or vector accordingly.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model.space.n:
        raise ValueError(f"query has dimension {X.shape[1]}, expected {model.space.n}")
    kstar = _kernel_cross_cached(model, X)  # (N, m)
    mu = kstar.T @ model.alpha
    w = solve_triangular(model.kernel_matrix_factor, kstar, lower=True, check_finite=False)
    sigma2 = np.maximum(model.hyperparams.amplitude - np.einsum("ij,ij->j", w, w), 0.0)
    if single:
        return float(mu[0]), float(sigma2[0])
    return mu, sigma2


def current_best(model: FittedModel, mode: str = "posterior_mean") -> int:
    """Index of the current-best observed point.

    ``posterior_mean`` takes the argmax of the posterior mean over observed
    points (ties resolve to the lowest index); ``last_chosen`` returns the
    winner of the final record.
    """
    if len(model.dataset) == 0:
        raise InvalidState("cannot pick a best point from an empty dataset")
    if mode == "posterior_mean":
        mu, _ = posterior(model, model.points)
        return int(np.argmax(mu))
    if mode == "last_chosen":
        records = model.dataset.records
        if not records:
            raise InvalidState("last_chosen requires at least one record")
        return records[-1].winner
    raise ValueError(f"unknown best-point mode {mode!r}")


def best_point(model: FittedModel, mode: str = "posterior_mean") -> np.ndarray:
    return model.points[current_best(model, mode)].copy()
