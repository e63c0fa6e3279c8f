"""Exception and warning types raised across boundarykit."""


class BoundaryKitError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(BoundaryKitError, ValueError):
    pass


class RankDeficient(BoundaryKitError, ValueError):
    pass


class EmptySet(BoundaryKitError, ValueError):
    pass


class IndexOutOfRange(BoundaryKitError, IndexError):
    pass


class InsufficientNeighbors(BoundaryKitError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateSpectrum(BoundaryKitError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class EmptyInput(BoundaryKitError, ValueError):
    pass


class DimensionTooHigh(BoundaryKitError, ValueError):
    pass


class ParamsOutOfRange(BoundaryKitError, ValueError):
    pass


class DegenerateNormal(BoundaryKitError):
    pass


class EmptyCloud(BoundaryKitError, ValueError):
    pass


class EmptyComplex(BoundaryKitError, ValueError):
    pass


class InvalidParams(BoundaryKitError, ValueError):
    pass


class OutsideDomain(BoundaryKitError, ValueError):
    pass


class InvalidK(BoundaryKitError, ValueError):
    pass


class NoAdmissibleScale(BoundaryKitError):
    pass


class TooFewRadii(BoundaryKitError, ValueError):
    pass


class LowContrast(UserWarning):
    """The sorted probe radii show no usable jump."""


class DegenerateNormalWarning(UserWarning):
    """A mean normal vanished (witnesses disagree); the point is demoted."""


class PatchScaleWarning(UserWarning):
    """eps_int exceeds eps_bd / 6."""


class BumpAdmissibilityWarning(UserWarning):
    """Bump parameters violate the reach-stability conditions."""
