"""Exception hierarchy shared by every module."""


class SecureIdError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SecureIdError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(SecureIdError, ValueError):
    """Array dimensions do not match."""


class InvariantError(SecureIdError, ValueError):
    """A value violates a type invariant (pmf normalization, power budget, ...)."""


class ConfigurationError(SecureIdError, ValueError):
    """Incompatible construction or estimator settings."""


class ResourceError(SecureIdError, RuntimeError):
    """The requested object would exceed the configured memory/size budget."""


class ConfigFileError(SecureIdError, ValueError):
    """Malformed or unknown entries in an experiment config file."""
