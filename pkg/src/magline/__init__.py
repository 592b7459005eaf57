"""Coupled-mode simulator for magnon-photon coupling mediated by
single- and multi-mode microwave waveguides.

The package models a magnon (e.g. a YIG sphere) and a cavity photon
placed far apart on a transmission line, coupled only through the
travelling waves of the line's propagation modes.  It provides
frequency-domain transmission engines, the critical-coupling loading
that nulls the bare-cavity transmission, cooperativity expressions, an
independent time-domain integrator for cross-validation, detuning maps
with level-attraction / level-repulsion classification, and a
derivative-free fitter for recovering model parameters from spectra.
"""

__version__ = "0.1.0"

from .analysis import (
    CouplingClassification,
    Dip,
    classify_coupling,
    detuning_map,
    find_dips,
    phase_periodicity,
    transmission_spectrum,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    MaglineError,
    NumericalError,
    ScenarioError,
)
from .fitting import FitProblem, FitResult, FlatDirectionWarning, Parameter, fit, residual
from .model import (
    DetuningMap,
    ModeCoupling,
    OscillatorParams,
    Spectrum,
    SystemConfig,
    WaveguideMode,
    phases_for,
    reference_config,
    validate,
    with_detuning,
    without_magnon,
)
from .multi_mode import CriticalSolution, matrix_cooperativity
from .multi_mode import analytic_channels as analytic_channels_multi
from .multi_mode import build_coupled as build_coupled_multi
from .multi_mode import cooperativity as cooperativity_multi
from .multi_mode import critical_loading as critical_condition_multi
from .multi_mode import s21_analytic as s21_analytic_multi
from .multi_mode import s21_cavity as s21_cavity_multi
from .multi_mode import s21_coupled as s21_coupled_multi
from .single_mode import build_coupled as build_coupled_single
from .single_mode import cooperativity as cooperativity_single
from .single_mode import s21_cavity as s21_cavity_single
from .single_mode import s21_coupled
from .solver import (
    CoupledSystem,
    EigenPair,
    assemble_system,
    eigenpairs,
    solve_steady_state,
    steady_state_s21,
    time_domain_s21,
    transmission_zero_matrix,
)

__all__ = [
    "__version__",
    # model
    "ModeCoupling", "OscillatorParams", "WaveguideMode", "SystemConfig",
    "Spectrum", "DetuningMap", "validate", "reference_config", "phases_for",
    "with_detuning", "without_magnon",
    # single-mode engine
    "s21_cavity_single", "build_coupled_single", "s21_coupled", "cooperativity_single",
    # multi-mode engine
    "s21_cavity_multi", "critical_condition_multi", "CriticalSolution",
    "build_coupled_multi", "s21_coupled_multi", "s21_analytic_multi",
    "analytic_channels_multi", "cooperativity_multi", "matrix_cooperativity",
    # solver / oracle
    "CoupledSystem", "EigenPair", "assemble_system", "solve_steady_state",
    "steady_state_s21", "eigenpairs", "transmission_zero_matrix", "time_domain_s21",
    # analysis
    "transmission_spectrum", "detuning_map", "classify_coupling",
    "CouplingClassification", "find_dips", "Dip", "phase_periodicity",
    # fitting
    "FitProblem", "FitResult", "Parameter", "fit", "residual", "FlatDirectionWarning",
    # errors
    "MaglineError", "ConfigError", "ScenarioError", "NumericalError", "ConvergenceError",
]
