"""Special functions: standard normal CDF/quantile, the h-family and a
bivariate normal orthant oracle."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .errors import DomainError

_THETA_ZERO = 1e-12


def std_normal_cdf(x):
    """Standard normal CDF, vectorised. Accepts +-inf."""
    return special.ndtr(x)


def std_normal_sf(x):
    return special.ndtr(-np.asarray(x, dtype=float))


def std_normal_quantile(p):
    """Inverse standard normal CDF on the open interval (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError(f"std_normal_quantile requires p in (0, 1), got {p!r}")
    out = special.ndtri(arr)
    return float(out) if np.ndim(out) == 0 else out


def normal_of_exp(y):
    """Map from the standard exponential scale to the standard normal scale,
    ``y -> Phi^{-1}(1 - exp(-y))``.

    Evaluated without forming ``1 - exp(-y)`` for large ``y`` so that the map
    stays finite far into the tail (``y`` of several hundred). ``y = 0`` maps
    to ``-inf``.
    """
    y = np.asarray(y, dtype=float)
    big = y > math.log(2.0)
    out = np.empty(y.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[big] = -special.ndtri_exp(-y[big])
        out[~big] = special.ndtri(-np.expm1(-y[~big]))
    return float(out) if out.ndim == 0 else out


def exp_of_normal(u):
    """Inverse of :func:`normal_of_exp`: ``u -> -log(1 - Phi(u))``."""
    u = np.asarray(u, dtype=float)
    out = -special.log_ndtr(-u)
    return float(out) if out.ndim == 0 else out


def h_transform(theta, lam):
    """``h_theta(lam) = (lam**theta - 1) / theta``, with ``log(lam)`` at theta = 0.

    Written as ``expm1(theta * log(lam)) / theta``, which is continuous in
    theta and free of cancellation for small ``|theta|``.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0.0)):
        raise DomainError("h_transform requires lambda > 0")
    log_lam = np.log(lam)
    if abs(theta) < _THETA_ZERO:
        out = log_lam
    else:
        out = np.expm1(theta * log_lam) / theta
    return float(out) if out.ndim == 0 else out


def h_inverse(theta, x):
    """Inverse of :func:`h_transform` in ``lam``.

    The image of ``h_theta`` on ``(0, inf)`` is ``(-1/theta, inf)`` for
    ``theta > 0``, ``(-inf, -1/theta)`` for ``theta < 0`` and the whole line
    for ``theta = 0``.
    """
    x = np.asarray(x, dtype=float)
    if abs(theta) < _THETA_ZERO:
        out = np.exp(x)
    else:
        arg = theta * x
        if np.any(~(arg > -1.0)):
            raise DomainError(f"x outside the image of h_theta for theta={theta}")
        out = np.exp(np.log1p(arg) / theta)
    return float(out) if out.ndim == 0 else out


def bvn_upper_prob(rho, x1, x2):
    """P(U1 > x1, U2 > x2) for a standard bivariate normal with correlation rho.

    Computed by adaptive quadrature of
    ``phi(u) * Phi_bar((x_b - rho*u) / sqrt(1 - rho^2))`` over ``u > x_a``,
    where ``x_a`` is the larger threshold. Intended as an oracle, not for speed.
    """
    rho = float(rho)
    if not abs(rho) < 1.0:
        raise DomainError(f"|rho| must be < 1, got {rho}")
    x1 = float(x1)
    x2 = float(x2)
    if x1 == math.inf or x2 == math.inf:
        return 0.0
    if x1 == -math.inf:
        return float(std_normal_sf(x2))
    if x2 == -math.inf:
        return float(std_normal_sf(x1))
    xa, xb = (x1, x2) if x1 >= x2 else (x2, x1)
    s = math.sqrt(1.0 - rho * rho)

    def integrand(u):
        return math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi) * special.ndtr(
            -(xb - rho * u) / s
        )

    # Integrand is below 1e-300 beyond max(xa, 0) + 38.
    upper = max(xa, 0.0) + 38.0
    lower = max(xa, -38.0)
    breaks = [p for p in (0.0, xb / rho if rho != 0 else None) if p is not None and lower < p < upper]
    val, _ = integrate.quad(
        integrand, lower, upper, epsabs=1e-15, epsrel=1e-12, limit=400, points=breaks or None
    )
    return min(max(val, 0.0), 1.0)
