"""Exception hierarchy shared by every module."""


class VLineError(Exception):
    """Base class for all package errors."""


class DomainError(VLineError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class CoverageError(DomainError):
    """A sinogram grid does not contain the samples an operation needs."""


class NumericError(VLineError, ArithmeticError):
    """Non-finite values or a numerically unusable intermediate result."""


class ConditioningError(NumericError):
    """A Mellin-domain denominator came too close to zero."""

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class FileFormatError(DomainError):
    """A binary or text file could not be parsed."""


class ConfigError(DomainError):
    """A configuration file holds an unknown key or an invalid value."""
