"""Exception hierarchy shared by every module of the package."""


class GBError(Exception):
    """Base class for all errors raised by gbmoduli."""


class DomainError(GBError, ValueError):
    """Argument outside the domain of an operation, e.g. a point off its chart."""


class DefinitenessError(GBError, ValueError):
    """The metric is not symmetric positive definite at a point."""


class ConfigurationError(GBError, ValueError):
    """Invalid numerical configuration (step sizes, tolerances, names)."""


class DimensionError(GBError, ValueError):
    """Operation is only defined for a different dimension."""


class CapabilityError(GBError):
    """Requested computation is outside what this implementation supports."""


class NumericalQualityError(GBError, ArithmeticError):
    """Input tensor violates a required symmetry beyond tolerance."""


class OutsideRegionError(GBError, ValueError):
    """Point violates one of the constraints of a region."""


class CornerRegularityError(GBError, ValueError):
    """Active constraint gradients at a corner are linearly dependent."""


class SingularGradientError(GBError, ArithmeticError):
    """Constraint gradient vanishes where a unit normal is required."""


class InsufficientDataError(GBError):
    """Topological data needed for the inner Euler characteristic is missing."""


class ModelConsistencyError(GBError):
    """A moduli model violated one of its structural guarantees."""


class InconsistencyError(GBError, ArithmeticError):
    """Two independent numerical routes disagree beyond their error bars."""


class RangeError(GBError, ValueError):
    """Argument outside the range where a formula is stated to hold."""
