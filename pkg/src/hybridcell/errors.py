"""Exception hierarchy shared by the analytic, simulation and CLI layers."""


class HybridCellError(Exception):
    """Base class for all package errors."""


class DomainError(HybridCellError, ValueError):
    """An argument lies outside the domain where the model is defined."""


class GuardClearanceError(DomainError):
    """Receiver too close to a guard-region edge: R_c + R_g - r <= d0."""

    def __init__(self, message, tier=None, beta=None):
        super().__init__(message)
        self.tier = tier
        self.beta = beta


class TruncationError(HybridCellError):
    """A truncated series did not reach its tolerance within the term cap."""

    def __init__(self, message, achieved_mass=None, terms=None):
        super().__init__(message)
        self.achieved_mass = achieved_mass
        self.terms = terms


class NumericError(HybridCellError, ArithmeticError):
    """A special-function evaluation failed to converge or went non-finite."""


class UnsupportedConfigError(HybridCellError):
    """The requested evaluation path does not apply to this configuration."""


class SchemaError(HybridCellError):
    """A scenario document failed validation."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
