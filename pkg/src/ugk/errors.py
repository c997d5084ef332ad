"""Exception types raised across the package."""


class UgkError(Exception):
    """Base class for all package errors."""


# scene loading / validation
class MissingLayer(UgkError):
    pass


class DimensionMismatch(UgkError):
    pass


class NegativeHeight(UgkError):
    pass


class UnknownCategory(UgkError):
    pass


class TooFewBlocks(UgkError):
    pass


# solar
class SunBelowHorizon(UgkError):
    pass


# graph construction
class TooFewNodes(UgkError):
    pass


# tensor / model
class ShapeMismatch(UgkError):
    pass


class LengthMismatch(UgkError):
    pass


class EmptySplit(UgkError):
    pass


class DivergenceDetected(UgkError):
    pass


# metrics
class DegenerateVariance(UgkError):
    pass
