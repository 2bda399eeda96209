"""Exception taxonomy shared across the package.

Every error raised by riskshift derives from RiskshiftError so callers can
catch the whole family.  Each subclass marks one contract violation kind; the
CLI maps them onto exit codes (config = 2, numeric = 3, IO = 4).
"""


class RiskshiftError(Exception):
    """Base class for all riskshift errors."""


class InvalidDimensionError(RiskshiftError, ValueError):
    """Shape or dimension constraints violated (rank > ambient dim, mismatched lengths, ...)."""


class NumericInputError(RiskshiftError, ValueError):
    """Inputs are numerically unusable: non-finite entries, out-of-range parameters."""


class DegenerateShiftError(RiskshiftError, ValueError):
    """Shift parameters undefined because the ground truth has no energy under the shift."""


class UnreachableRatioError(RiskshiftError, ValueError):
    """Requested covariance-shift ratio lies outside the constructible family."""


class CovarianceError(RiskshiftError, ValueError):
    """A claimed covariance is not positive semidefinite beyond tolerance."""


class DegenerateDecisionError(RiskshiftError, ValueError):
    """A decision-function correlation is undefined (zero variance on one side)."""


class RelationInapplicableError(RiskshiftError, ValueError):
    """The requested risk relation does not exist for these shift parameters."""


class RiskDomainError(RiskshiftError, ValueError):
    """A risk value lies outside the domain of the requested relation."""


class ConfigError(RiskshiftError, ValueError):
    """Experiment configuration is malformed: unknown keys, bad values, missing requirements."""
