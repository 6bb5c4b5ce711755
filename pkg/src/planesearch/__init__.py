"""Preference-driven Bayesian optimization over two-dimensional search planes.

An n-dimensional design search is decomposed into a sequence of plane-search
queries: the user (or a simulated one) picks the best point on a rhombus
subspace through a zoomable grid, the choice becomes preference data for a
Gaussian-process model of latent goodness, and the model's acquisition
function places the next plane.
"""

from .acquisition import (
    AcquisitionConfig,
    ei_closed_form,
    expected_improvement,
    maximize_ei,
    plane_acquisition,
)
from .bench import (
    SyntheticFunction,
    TrialConfig,
    TrialResult,
    isotropic_gaussian,
    neg_scaled_rosenbrock,
    run_experiment,
    run_trial,
)
from .errors import (
    ConstructionFailure,
    FitFailure,
    InvalidState,
    PlaneSearchError,
    RejectedChoice,
    SimulationError,
)
from .gridsession import (
    Cell,
    GridSpec,
    LineSession,
    PlaneSession,
    choose,
    finalize_preference,
    grid_cells,
    reachable_set_size,
    simulate_line_session,
    simulate_plane_session,
)
from .kernels import HyperPrior, KernelHyperparams, kernel
from .prefgp import (
    Dataset,
    FittedModel,
    PreferenceIntent,
    PreferenceRecord,
    best_point,
    btl_log_likelihood,
    build_model,
    current_best,
    map_fit,
    posterior,
)
from .space import SearchSpace
from .stats import bonferroni_alpha, mann_whitney_u
from .subspace import (
    Line,
    Plane,
    clip_negative_vertices,
    construct_line,
    construct_plane,
    initial_plane,
    plane_point,
    plane_points,
    random_plane,
)

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig",
    "Cell",
    "ConstructionFailure",
    "Dataset",
    "FitFailure",
    "FittedModel",
    "GridSpec",
    "HyperPrior",
    "InvalidState",
    "KernelHyperparams",
    "Line",
    "LineSession",
    "Plane",
    "PlaneSearchError",
    "PlaneSession",
    "PreferenceIntent",
    "PreferenceRecord",
    "RejectedChoice",
    "SearchSpace",
    "SimulationError",
    "SyntheticFunction",
    "TrialConfig",
    "TrialResult",
    "best_point",
    "bonferroni_alpha",
    "btl_log_likelihood",
    "build_model",
    "choose",
    "clip_negative_vertices",
    "construct_line",
    "construct_plane",
    "current_best",
    "ei_closed_form",
    "expected_improvement",
    "finalize_preference",
    "grid_cells",
    "initial_plane",
    "isotropic_gaussian",
    "kernel",
    "mann_whitney_u",
    "map_fit",
    "maximize_ei",
    "neg_scaled_rosenbrock",
    "plane_acquisition",
    "plane_point",
    "plane_points",
    "posterior",
    "random_plane",
    "reachable_set_size",
    "run_experiment",
    "run_trial",
    "simulate_line_session",
    "simulate_plane_session",
]
