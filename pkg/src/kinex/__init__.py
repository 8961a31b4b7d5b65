"""Kinetic exchange simulator for income-class dynamics under
conservation-constrained multiplicative noise, with ensemble statistics
for inequality / mobility / income correlations."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DegeneratePopulationError,
    DegenerateSeriesError,
    DomainError,
    EnsembleError,
    KinexError,
    ModelParameterError,
    PositivityError,
    RecoveryFailureError,
    SingularLadderError,
)
from .indicators import IndicatorSeries, gini, indicator_series, lorenz_curve, mobility, total_income
from .model import (
    CoefficientTensor,
    ExchangeModel,
    IncomeLadder,
    PaymentMatrix,
    build_coefficients,
    build_payment_matrix,
    drift,
    equilibrium_for_income,
    integrate_deterministic,
)
from .noise import (
    CorrectionMatrix,
    correction_matrix,
    draw_noise,
    omega,
    project_income,
    project_population,
)
from .sde import SimulationConfig, Trajectory, run_trajectory, step_stochastic
from .ensemble import (
    ClosenessDiagnostics,
    EnsembleReport,
    RealizationStats,
    SweepResult,
    closeness_diagnostics,
    pearson,
    run_ensemble,
    sweep_mu,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientTensor",
    "ClosenessDiagnostics",
    "ConfigError",
    "ConvergenceError",
    "CorrectionMatrix",
    "DegeneratePopulationError",
    "DegenerateSeriesError",
    "DomainError",
    "EnsembleError",
    "EnsembleReport",
    "ExchangeModel",
    "IncomeLadder",
    "IndicatorSeries",
    "KinexError",
    "ModelParameterError",
    "PaymentMatrix",
    "PositivityError",
    "RealizationStats",
    "RecoveryFailureError",
    "SimulationConfig",
    "SingularLadderError",
    "SweepResult",
    "Trajectory",
    "build_coefficients",
    "build_payment_matrix",
    "closeness_diagnostics",
    "correction_matrix",
    "draw_noise",
    "drift",
    "equilibrium_for_income",
    "gini",
    "indicator_series",
    "integrate_deterministic",
    "lorenz_curve",
    "mobility",
    "omega",
    "pearson",
    "project_income",
    "project_population",
    "run_ensemble",
    "run_trajectory",
    "step_stochastic",
    "sweep_mu",
    "total_income",
]
