"""Exception hierarchy for triplet-embed.

Two broad families matter to callers: :class:`DataFormatError` (and plain
``OSError``) for anything wrong with files on disk, and everything else for
invalid values, configurations, or dataset states. The CLI maps the former to
exit code 2 and the latter to exit code 1.
"""


class TripletEmbedError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TripletEmbedError, ValueError):
    """An argument, configuration, or dataset violates a precondition."""


class ZeroVectorError(ValidationError):
    """A vector has (numerically) zero Euclidean norm and cannot be normalized."""


class NonFiniteError(ValidationError):
    """An input contains NaN or infinite entries."""


class DimensionError(ValidationError):
    """Operand shapes or dimensionalities are incompatible."""


class InsufficientDataError(ValidationError):
    """Too few samples for the requested operation."""


class NoValidAnchorError(ValidationError):
    """Every class in the dataset is a singleton; no anchor/positive pair exists."""


class NoNegativesError(ValidationError):
    """No row with a different class label exists."""


class UnknownTemplateError(ValidationError):
    """A pair protocol references a template id that is not defined."""


class EmptyScoresError(ValidationError):
    """ROC computation requires at least one genuine and one impostor score."""


class EmptyGalleryError(ValidationError):
    """Identification requires a non-empty gallery."""


class EmptyProbeSetError(ValidationError):
    """No probes remain after closed-set filtering."""


class ZeroProjectionError(ValidationError):
    """Cosine scoring is undefined for a zero projected vector."""


class DataFormatError(TripletEmbedError):
    """A file does not conform to one of the on-disk formats."""


class BadMagicError(DataFormatError):
    """A binary file does not start with the expected magic bytes."""


class TruncatedFileError(DataFormatError):
    """A binary file's payload size disagrees with its header."""


class DimensionMismatchError(DataFormatError):
    """Dimensions recorded in a file are invalid or inconsistent."""


class LabelCountMismatchError(DataFormatError):
    """A labels file does not have exactly one line per feature row."""
