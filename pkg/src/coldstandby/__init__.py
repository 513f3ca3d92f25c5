"""Lifetime of an n-element cold-standby system with one repair device."""

from .asymptotics import (
    ConvergenceReport,
    convergence_sweep,
    ks_vs_exponential,
    lst_limit_error,
    normalized_cdf_analytic,
)
from .errors import ConsistencyError, NumericalDomainError, ParameterError, ReliabilityError
from .laplace import (
    CharRoots,
    LaplaceEvaluation,
    char_roots,
    lst_tau,
    mean_from_transform,
    phi_closed_form,
    phi_special_n2,
    phi_special_n3,
    phi_tridiagonal,
)
from .model import EpsilonScale, GeneratorDescription, SystemParams, build_generator, epsilon_scale, validate_params
from .montecarlo import SimulationConfig, SimulationResult, empirical_cdf, run_trials, simulate_one
from .rng import TrialStream
from .transient import TimeGrid, TransientSolution, default_grid, lifetime_cdf, mean_lifetime, solve_transient

__version__ = "0.1.0"
