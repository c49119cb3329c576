"""Exception hierarchy shared by every module."""


class BWError(Exception):
    """Base class for errors raised by bwldp."""


class NonSymmetric(BWError, ValueError):
    pass


class NotPSD(BWError, ValueError):
    pass


class AnchorSingular(BWError, ValueError):
    """Anchor matrix is not strictly positive definite."""


class OutOfInjectivity(BWError, ValueError):
    """Tangent vector A has A + I indefinite, so the exponential map is undefined."""


class ExtrapolationOutOfRange(BWError, ValueError):
    pass


class DimensionMismatch(BWError, ValueError):
    pass


class SupportViolation(BWError, ValueError):
    """Relative entropy requested for a measure that is not absolutely continuous."""


class InvalidPopulation(BWError, ValueError):
    pass


class InfeasibleAnchor(BWError):
    """Anchor lies outside the set where the dual problem attains its supremum."""


class GridMismatch(BWError, ValueError):
    pass
