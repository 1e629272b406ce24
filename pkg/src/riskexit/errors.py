"""Exception hierarchy shared by all riskexit modules."""


class RiskExitError(Exception):
    """Base class for package errors."""


class DomainError(RiskExitError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class UnsupportedClaimLawError(RiskExitError):
    """The requested quantity needs exponential claims."""


class RegimeError(RiskExitError, ValueError):
    """The drift sign does not match the requested formula."""


class ConvergenceError(RiskExitError):
    """A root finder could not bracket or converge."""


class ConsistencyError(RiskExitError):
    """An identity that must hold numerically was violated."""


class CensoringError(RiskExitError):
    """Too many simulated paths hit the censoring horizon."""
