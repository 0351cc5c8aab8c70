"""Exception hierarchy shared across the package.

Each class carries the CLI exit code it maps to.
"""


class LdpTailError(Exception):
    exit_code = 5


class ConfigError(LdpTailError, ValueError):
    """Invalid parameters or configuration."""

    exit_code = 2


class DomainError(ConfigError):
    """Argument outside the domain of a function."""


class DimensionError(ConfigError):
    """Point dimension does not match the event or model."""


class DataError(LdpTailError):
    """Input data unusable (empty after filtering, unreadable, ...)."""

    exit_code = 3


class DegenerateError(LdpTailError, ArithmeticError):
    """Numerically degenerate input, e.g. tied order statistics."""

    exit_code = 4


class MonotonicityError(LdpTailError):
    """Membership along a scaling or shift path is not monotone."""

    exit_code = 4

    def __init__(self, msg, n_violations=0):
        super().__init__(msg)
        self.n_violations = n_violations


class EmptyEventError(DegenerateError):
    """No ray from the origin enters the event within the scale cap."""
