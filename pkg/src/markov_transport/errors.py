"""Exception hierarchy for the package."""


class MarkovTransportError(Exception):
    """Base class for all package-specific errors."""


class NonMarkovGenerator(MarkovTransportError):
    """Generator matrix has a negative off-diagonal entry or a nonzero row sum."""


class DetailedBalanceViolation(MarkovTransportError):
    pass


class NonPositiveMeasure(MarkovTransportError):
    pass


class ZeroDensity(MarkovTransportError):
    pass


class NotMeanZero(MarkovTransportError):
    pass


class ReducibleChain(MarkovTransportError):
    pass


class NegativeTime(MarkovTransportError):
    pass


class BoundaryMassLoss(MarkovTransportError):
    pass


class NonPositiveRate(MarkovTransportError):
    pass


class BadSize(MarkovTransportError):
    pass


class SizeOverflow(MarkovTransportError):
    pass


class DomainError(MarkovTransportError):
    pass


class XiDomainError(MarkovTransportError):
    pass


class InfeasiblePath(MarkovTransportError):
    pass


class NonPositiveDensity(MarkovTransportError):
    pass


class RootFindFailure(MarkovTransportError):
    pass


class NotNormalized(MarkovTransportError):
    pass


class DegenerateMap(MarkovTransportError):
    pass


class BadDimension(MarkovTransportError):
    pass


class BadTimes(MarkovTransportError):
    pass


class BadExponent(MarkovTransportError):
    pass


class BadParameters(MarkovTransportError):
    pass


class NotProductForm(MarkovTransportError):
    pass


class GeodesicQuality(MarkovTransportError):
    pass
