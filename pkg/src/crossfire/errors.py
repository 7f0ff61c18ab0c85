"""Exception types raised across the package."""


class CrossfireError(Exception):
    """Base class for all errors raised by this package."""


# media file I/O
class MalformedHeader(CrossfireError):
    pass


class UnsupportedMaxval(CrossfireError):
    pass


class TruncatedPixelData(CrossfireError):
    pass


class UnsupportedEncoding(CrossfireError):
    pass


class TruncatedData(CrossfireError):
    pass


class IoFailure(CrossfireError):
    pass


# numerics
class DegenerateNorm(CrossfireError):
    pass


class DimMismatch(CrossfireError):
    pass


# encoders
class BadSpec(CrossfireError):
    pass


class ShapeMismatch(CrossfireError):
    pass


class EmptyText(CrossfireError):
    pass


# transforms
class UnmappedLabel(CrossfireError):
    pass


class ModalityMismatch(CrossfireError):
    pass


# defenses
class OddDimsForDownsample(CrossfireError):
    pass


# evaluation
class EmptyResults(CrossfireError):
    pass


class IncompleteGrid(CrossfireError):
    pass


# config
class SchemaViolation(CrossfireError):
    pass


class MissingFile(CrossfireError):
    pass
