"""Strip-domain Zakharov-Kuznetsov solver and energy-decay verification harness."""

__version__ = "0.1.0"

from .grid import (Field, Grid, ProfileSpec, build_grid, make_profile, quadrature,
                   read_profile_table)
from .operators import (OperatorSet, build_operators, d_x, dispersive, hyperviscosity,
                        nonlinear, rhs)
from .functionals import (FunctionalSeries, FunctionalSnapshot, SmallnessReport,
                          interpolation_check, j0_functional, ode_comparison_check,
                          smallness_check, snapshot, steklov_ratio)
from .integrator import IntegratorConfig, RunResult, run, step
from .experiments import (ConvergenceReport, DecayFit, PerturbationReport,
                          cubic_wall_profile, decay_experiment, epsilon_convergence,
                          fit_decay, lemma_suite, perturbation_experiment,
                          slow_mode_profile)
from .runconfig import ConfigError, RunConfig, parse_config

__all__ = [
    "__version__",
    "Field", "Grid", "ProfileSpec", "build_grid", "make_profile", "quadrature",
    "read_profile_table",
    "OperatorSet", "build_operators", "d_x", "dispersive", "hyperviscosity",
    "nonlinear", "rhs",
    "FunctionalSeries", "FunctionalSnapshot", "SmallnessReport",
    "interpolation_check", "j0_functional", "ode_comparison_check",
    "smallness_check", "snapshot", "steklov_ratio",
    "IntegratorConfig", "RunResult", "run", "step",
    "ConvergenceReport", "DecayFit", "PerturbationReport", "cubic_wall_profile",
    "decay_experiment", "epsilon_convergence", "fit_decay", "lemma_suite",
    "perturbation_experiment", "slow_mode_profile",
    "ConfigError", "RunConfig", "parse_config",
]
