"""Exception and warning types shared across the package."""


class SteinshrinkError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SteinshrinkError):
    """An input violates a documented precondition (shape, symmetry, domain)."""


class RankError(SteinshrinkError):
    """A matrix does not have the rank an operation requires."""


class LeadingBlockError(RankError):
    """The leading block of an observation matrix is numerically row-rank deficient."""


class SpectrumError(SteinshrinkError):
    """An eigenvalue that must be positive real came out complex or non-positive."""


class ConfigError(SteinshrinkError):
    """An estimator or experiment configuration is infeasible."""


class SimulationError(SteinshrinkError):
    """A Monte Carlo experiment could not produce a valid draw."""


class RankWarning(UserWarning):
    """An estimator expected to be full rank produced a rank-deficient matrix."""
