"""Estimation of very small probabilities of multivariate extreme events
via a tail large deviation principle."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    DataError,
    DegenerateError,
    DimensionError,
    DomainError,
    LdpTailError,
    MonotonicityError,
)
