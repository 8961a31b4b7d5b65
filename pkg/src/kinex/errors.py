"""Exception hierarchy. Everything raised by kinex derives from KinexError."""


class KinexError(Exception):
    """Base class for all kinex errors."""


class ModelParameterError(KinexError, ValueError):
    """Model parameters produce an invalid construction (e.g. coefficients outside [0, 1])."""


class DomainError(KinexError, ValueError):
    """A value lies outside the domain the model is defined on (e.g. total income)."""


class PositivityError(KinexError):
    """An operation requiring strictly positive class fractions met a zero component."""


class SingularLadderError(KinexError):
    """A correction-matrix window is degenerate (cannot happen for strictly increasing incomes)."""


class DegenerateSeriesError(KinexError):
    """A correlation was requested for a series with zero variance."""


class DegeneratePopulationError(KinexError):
    """Mobility is undefined: the whole population sits in the boundary classes."""


class ConvergenceError(KinexError):
    """Deterministic relaxation failed to reach a stationary state."""


class RecoveryFailureError(KinexError):
    """Deterministic recovery did not restore positivity within the step budget."""


class EnsembleError(KinexError):
    """Too many realizations of an ensemble failed to complete."""


class ConfigError(KinexError, ValueError):
    """A run configuration is malformed or violates a constraint."""
