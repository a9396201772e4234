"""Exception types raised across the package."""


class TmvzslError(Exception):
    """Base class for all package errors."""


class FormatError(TmvzslError):
    """Structurally malformed input file (ragged rows, inconsistent dims)."""


class ParseError(TmvzslError):
    """A token could not be parsed as a value of the expected kind."""


class EmptyInputError(TmvzslError):
    """Input file contains no data rows."""


class InvalidParameter(TmvzslError):
    """A parameter violates its documented precondition."""


class ShapeError(TmvzslError):
    """Dimension mismatch between operands."""


class SingularSystemError(TmvzslError):
    """Unregularized solve on a rank-deficient system."""


class NumericalError(TmvzslError):
    """An underlying numerical routine failed to converge."""


class MissingVectorError(TmvzslError):
    """A label has no entry in the word-vector table."""


class SizeLimitError(TmvzslError):
    """An enumeration would exceed the configured size cap."""


class InvalidInput(TmvzslError):
    """Semantically invalid input (e.g. an empty truth label set)."""


class ConfigError(TmvzslError):
    """Run configuration is missing keys or references bad paths."""
