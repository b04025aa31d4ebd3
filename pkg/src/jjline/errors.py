"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericsError -> 3.
"""


class JJLineError(Exception):
    """Base class for all package errors."""


class ConfigError(JJLineError):
    """Invalid configuration, file format, or argument domain."""


class NumericsError(JJLineError):
    """A numerical procedure failed to meet its accuracy contract."""


class OutOfRegimeError(NumericsError):
    """Parameters outside the validity regime of the requested method."""
