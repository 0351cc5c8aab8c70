"""Log-GW marginal tail fitting and the hybrid empirical/extrapolated
quantile estimator on the exponential scale.

The quantile function is parameterised as ``q(z) = F^{-1}(1 - exp(-z))``.
Below ``y_n = log(n / k0)`` the estimator returns empirical order
statistics; above it, ``X_{n-k0+1:n} * exp(g * h_theta(z / y_n))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateError, DomainError
from .special import h_transform

# Slack for float rounding before floor/ceil of quantities that are integers
# in exact arithmetic.
_INT_SLACK = 1e-9
_MIN_LOG_RATIO = 1e-12


@dataclass(frozen=True)
class SortedMarginal:
    """Ascending order statistics of one variable."""

    values: np.ndarray
    name: str = "x"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 4:
            raise ConfigError("a marginal needs at least 4 observations")
        if np.any(np.diff(v) < 0):
            raise ConfigError("values must be nondecreasing; use SortedMarginal.from_values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values, name="x"):
        return cls(np.sort(np.asarray(values, dtype=float)), name)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def upper(self, k: int) -> float:
        """The order statistic ``X_{n-k+1:n}`` (k-th largest)."""
        return float(self.values[self.n - k])


@dataclass(frozen=True)
class KSequence:
    k0: int
    k1: int
    k2: int
    iota: float
    n: int


@dataclass(frozen=True)
class LogGwTailFit:
    theta_hat: float
    g_hat: float
    anchor: float
    y_n: float
    kseq: KSequence

    def to_dict(self):
        return {
            "theta_hat": self.theta_hat,
            "g_hat": self.g_hat,
            "anchor": self.anchor,
            "y_n": self.y_n,
            "k0": self.kseq.k0,
            "k1": self.kseq.k1,
            "k2": self.kseq.k2,
            "iota": self.kseq.iota,
            "n": self.kseq.n,
        }


def default_k2(n: int) -> int:
    """``ceil((log n)^2)``."""
    return int(math.ceil(math.log(n) ** 2))


def k_sequence(n: int, k2: int, iota: float = 2.0) -> KSequence:
    """Derive ``k1 = floor((n/k2)^(-1/iota) n)`` and ``k0 = floor((n/k2)^(-1/iota^2) n)``."""
    if n < 4:
        raise ConfigError("n must be at least 4")
    if not 1 <= k2 < n:
        raise ConfigError(f"k2 must satisfy 1 <= k2 < n, got k2={k2}, n={n}")
    if not iota > 1.0:
        raise ConfigError("iota must exceed 1")
    ratio = n / k2

    def _k(power):
        x = ratio ** (-power) * n
        return int(math.floor(x * (1.0 + _INT_SLACK)))

    k1 = _k(1.0 / iota)
    k0 = _k(1.0 / iota**2)
    if not (1 <= k2 <= k1 <= k0 < n):
        raise ConfigError(
            f"invalid k-sequence for n={n}, k2={k2}, iota={iota}: "
            f"need k2 <= k1 <= k0 < n, got k0={k0}, k1={k1}"
        )
    return KSequence(k0=k0, k1=k1, k2=k2, iota=float(iota), n=int(n))


def fit_log_gw(marg: SortedMarginal, kseq: KSequence) -> LogGwTailFit:
    """Fit the log-GW index and scale from three upper order statistics."""
    if kseq.n != marg.n:
        raise ConfigError(f"k-sequence built for n={kseq.n}, sample has n={marg.n}")
    x0 = marg.upper(kseq.k0)
    x1 = marg.upper(kseq.k1)
    x2 = marg.upper(kseq.k2)
    if not x0 > 0.0:
        raise DegenerateError(
            f"marginal {marg.name!r}: anchor X_(n-k0+1) = {x0} must be positive"
        )
    r21 = math.log(x2 / x1)
    r10 = math.log(x1 / x0)
    if not (r21 > _MIN_LOG_RATIO and r10 > _MIN_LOG_RATIO):
        raise DegenerateError(
            f"marginal {marg.name!r}: degenerate spacing of order statistics "
            f"({x0}, {x1}, {x2})"
        )
    theta = (math.log(r21) - math.log(r10)) / math.log(kseq.iota)
    g = r10 / h_transform(theta, kseq.iota)
    y_n = math.log(marg.n / kseq.k0)
    return LogGwTailFit(theta_hat=theta, g_hat=g, anchor=x0, y_n=y_n, kseq=kseq)


def quantile_hat(fit: LogGwTailFit, marg: SortedMarginal, z):
    """Evaluate the hybrid quantile estimator at exponential-scale level(s) ``z``."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z >= 0.0)):
        raise DomainError("quantile_hat requires z >= 0")
    n = marg.n
    out = np.empty_like(z)
    emp = z <= fit.y_n
    if np.any(emp):
        pos = n * -np.expm1(-z[emp])
        idx = np.floor(pos + _INT_SLACK * np.maximum(pos, 1.0)).astype(np.int64)
        out[emp] = marg.values[np.minimum(idx, n - 1)]
    ext = ~emp
    if np.any(ext):
        # far-out levels overflow to inf, which is the right limit
        with np.errstate(over="ignore"):
            out[ext] = fit.anchor * np.exp(fit.g_hat * h_transform(fit.theta_hat, z[ext] / fit.y_n))
    return float(out) if out.ndim == 0 else out


def nu_diagnostic(fit, marg, true_q_inverse, z):
    """Relative error on the exponential scale: ``q^{-1}(q_hat(z)) / z - 1``."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0.0)):
        raise DomainError("nu_diagnostic requires z > 0")
    qh = quantile_hat(fit, marg, z)
    try:
        back = np.asarray(true_q_inverse(qh), dtype=float)
    except (ValueError, ArithmeticError) as exc:
        raise DomainError(f"q_hat(z) outside the domain of q^-1: {exc}") from exc
    if np.any(np.isnan(back)):
        raise DomainError("q_hat(z) outside the domain of q^-1")
    out = back / z - 1.0
    return float(out) if out.ndim == 0 else out


def fit_marginals(values, names=None, k2=None, iota=2.0):
    """Fit every column of an ``(n, m)`` array.

    Returns ``(margs, fits)``. ``k2=None`` uses :func:`default_k2`.
    """
    values = np.asarray(values, dtype=float)
    n, m = values.shape
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(m)]
    kseq = k_sequence(n, default_k2(n) if k2 is None else int(k2), iota)
    margs = [SortedMarginal.from_values(values[:, j], names[j]) for j in range(m)]
    fits = [fit_log_gw(mg, kseq) for mg in margs]
    return margs, fits
