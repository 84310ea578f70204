"""Exception and warning types shared across the package."""
from __future__ import annotations


class ReqpairError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ReqpairError):
    """A file could not be parsed; carries the path and 1-based line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class ValidationError(ReqpairError):
    """An input violated a documented invariant."""


class DuplicateIdError(ValidationError):
    pass


class UnknownIdError(ValidationError):
    pass


class UnknownLabelError(ValidationError):
    pass


class SelfPairError(ValidationError):
    pass


class EmptyTextError(ValidationError):
    pass


class ClassTooSmallError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class NonFiniteValueError(ValidationError):
    pass


class MissingEmbeddingError(ValidationError):
    pass


class MissingAnnotationError(ValidationError):
    pass


class UncoveredPositiveError(ValidationError):
    """A conflict-predicted pair has no filter decision covering it."""


class LabelModeError(ValidationError):
    """Datasets with incompatible label modes were combined."""


class TrainingDataError(ValidationError):
    """Training data is empty or contains a single class."""


class DegenerateVarianceError(ReqpairError):
    """All paired differences are identical, so the F statistic is undefined."""


class ModelFormatError(ReqpairError):
    """A model file is corrupt or has an unsupported version."""


class UnknownTagWarning(UserWarning):
    """A loaded part-of-speech tag is outside the documented tagset."""
