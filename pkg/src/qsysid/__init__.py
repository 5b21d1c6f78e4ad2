"""Hamiltonian estimation for a driven three-level system from a single p11 trace.

Power-spectrum seeding, Bayesian single-frequency likelihood refinement,
shot-noise simulation and identifiability checks for general N-level systems.
"""
from .bayes import amplitudes, fit_x, log_likelihood
from .errors import (
    DegenerateModelError,
    EstimationFailedError,
    InputFormatError,
    InsufficientDataError,
    InvalidPartitionError,
    UndefinedLikelihoodError,
)
from .estimator import EstimateResult, EstimatorConfig, error_metrics, estimate, exhaustive_search
from .model import ModelParams, p11, p11_components, params_from_couplings, propagator
from .sampling import TimeGrid, stratified_grid, uniform_grid
from .simulator import DataVector, exact_trace, simulate_trace
from .spectral import find_peak, power_spectrum

__all__ = [
    "DataVector",
    "DegenerateModelError",
    "EstimateResult",
    "EstimationFailedError",
    "EstimatorConfig",
    "InputFormatError",
    "InsufficientDataError",
    "InvalidPartitionError",
    "ModelParams",
    "TimeGrid",
    "UndefinedLikelihoodError",
    "amplitudes",
    "error_metrics",
    "estimate",
    "exact_trace",
    "exhaustive_search",
    "find_peak",
    "fit_x",
    "log_likelihood",
    "p11",
    "p11_components",
    "params_from_couplings",
    "power_spectrum",
    "propagator",
    "simulate_trace",
    "stratified_grid",
    "uniform_grid",
]
