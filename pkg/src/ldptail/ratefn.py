"""Rate functions of the multivariate normal reference model on the
exponential scale, and a numeric infimum of a homogeneous rate over an event."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar, nnls

from .errors import ConfigError, DomainError, EmptyEventError
from .events import _eval


@dataclass(frozen=True)
class NormalRateModel:
    correlation: np.ndarray
    precision: np.ndarray

    @classmethod
    def from_correlation(cls, v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        if v.shape[0] != v.shape[1]:
            raise ConfigError("correlation matrix must be square")
        if not np.allclose(v, v.T, atol=0, rtol=0) or not np.allclose(np.diag(v), 1.0, atol=0):
            raise ConfigError("correlation matrix must be symmetric with unit diagonal")
        if np.linalg.eigvalsh(v).min() <= 1e-12:
            raise ConfigError("correlation matrix must be positive definite")
        w = np.linalg.inv(v)
        return cls(correlation=v, precision=w)

    @classmethod
    def bivariate(cls, rho):
        if not abs(rho) < 1:
            raise DomainError("|rho| must be < 1")
        return cls.from_correlation([[1.0, rho], [rho, 1.0]])

    @property
    def m(self):
        return self.correlation.shape[0]


def _boundary_rate(model, x):
    """Rate at a point with some zero coordinates.

    ``I(x) = min u'Wu / 2`` over ``u_j = sqrt(2 x_j)`` where ``x_j > 0`` and
    ``u_j <= 0`` where ``x_j = 0``: a zero coordinate on the exponential
    scale is reached by any nonpositive normal value. With ``v = -u_Z >= 0``
    this is a nonnegative least-squares problem in ``v``.
    """
    w = model.precision
    pos = x > 0
    zero = ~pos
    u = np.zeros_like(x)
    u[pos] = np.sqrt(2 * x[pos])
    if np.any(pos) and np.any(zero):
        wzz = w[np.ix_(zero, zero)]
        L = np.linalg.cholesky(wzz)
        c = np.linalg.solve(L, w[np.ix_(zero, pos)] @ u[pos])
        # the u_Z-dependent part of u'Wu is |L'u_Z + c|^2 - |c|^2; with u_Z = -v, v >= 0
        v, _ = nnls(L.T, c)
        u[zero] = -v
    return max(0.5 * float(u @ w @ u), 0.0)


def normal_rate(model: NormalRateModel, x):
    """``I(x) = sum_{i,j} W_ij sqrt(x_i x_j)``; ``inf`` if any coordinate is negative.

    On the boundary of the orthant the rate is the lower semicontinuous
    value from :func:`_boundary_rate`, which is below the closed form when
    some correlations are negative (for ``m = 2``: ``I(x1, 0) = x1`` if
    ``rho < 0``). Accepts a point ``(m,)`` or points ``(..., m)``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.m:
        raise DomainError(f"expected dimension {model.m}")
    neg = np.any(x < 0, axis=-1)
    s = np.sqrt(np.maximum(x, 0.0))
    val = np.einsum("...i,ij,...j->...", s, model.precision, s)
    val = np.where(neg, math.inf, np.maximum(val, 0.0))
    edge = ~neg & np.any(x == 0, axis=-1) & np.any(x > 0, axis=-1)
    if np.any(edge):
        flat = x.reshape(-1, model.m)
        vals = np.atleast_1d(val).reshape(-1).copy()
        for i in np.nonzero(np.atleast_1d(edge).reshape(-1))[0]:
            vals[i] = _boundary_rate(model, flat[i])
        val = vals.reshape(np.shape(val))
    return float(val) if np.ndim(val) == 0 else val


def _check_rho(rho):
    if not abs(rho) < 1:
        raise DomainError("|rho| must be < 1")


def bivariate_rate(rho, x1, x2):
    """``(x1 + x2 - 2 rho sqrt(x1 x2)) / (1 - rho^2)``, vectorised.

    For ``rho < 0`` a point on an axis takes the boundary value
    ``max(x1, x2)`` (see :func:`normal_rate`).
    """
    _check_rho(rho)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    neg = (x1 < 0) | (x2 < 0)
    val = (x1 + x2 - 2 * rho * np.sqrt(np.maximum(x1 * x2, 0.0))) / (1 - rho * rho)
    if rho < 0:
        val = np.where((x1 == 0) | (x2 == 0), np.maximum(x1, x2), val)
    return np.where(neg, math.inf, val)


def psi(rho, t):
    """Angular profile ``I(1 - t, t)`` on ``t in [0, 1]``."""
    _check_rho(rho)
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise DomainError("t must lie in [0, 1]")
    out = bivariate_rate(rho, 1 - t, t)
    return float(out) if out.ndim == 0 else out


def kappa_normal(rho, x):
    """``inf I`` over the corner ``{y > x}`` for the bivariate normal model.

    Equal to ``I(x)`` when ``min(x1/x2, x2/x1) > rho^2`` or when ``rho < 0``
    and both coordinates are positive, and to ``max(x1, x2)`` otherwise.
    """
    _check_rho(rho)
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    if np.any((x1 < 0) | (x2 < 0)):
        raise DomainError("kappa_normal is defined on [0, inf)^2")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.minimum(x1 / x2, x2 / x1)
    ratio = np.where((x1 == 0) & (x2 == 0), 1.0, np.nan_to_num(ratio, nan=0.0))
    use_rate = (ratio > rho * rho) | ((rho < 0) & (x1 > 0) & (x2 > 0))
    out = np.where(use_rate, bivariate_rate(rho, x1, x2), np.maximum(x1, x2))
    return float(out) if out.ndim == 0 else out


# -- numeric infimum over an event -----------------------------------------

_RAY_ITERS = 80


def _ray_entry(event, dirs, cap):
    """Smallest ``lam`` in ``(0, cap]`` with ``lam * u`` in the event, per direction.

    Membership along each ray is assumed nondecreasing in ``lam`` (upper
    sets). ``inf`` where the ray is still outside at ``cap``.
    """
    inside_cap = _eval(event, dirs * cap)
    out = np.full(dirs.shape[0], math.inf)
    if not np.any(inside_cap):
        return out
    d = dirs[inside_cap]
    lo = np.full(d.shape[0], math.log(cap) - 60.0)
    hi = np.full(d.shape[0], math.log(cap))
    at_lo = _eval(event, d * np.exp(lo)[:, None])
    for _ in range(_RAY_ITERS):
        mid = 0.5 * (lo + hi)
        inside = _eval(event, d * np.exp(mid)[:, None])
        hi = np.where(inside, mid, hi)
        lo = np.where(inside, lo, mid)
    vals = np.exp(hi)
    vals[at_lo] = 0.0
    out[inside_cap] = vals
    return out


def _simplex_lattice(m, resolution):
    pts = [c for c in itertools.product(range(resolution + 1), repeat=m - 1) if sum(c) <= resolution]
    arr = np.array([list(c) + [resolution - sum(c)] for c in pts], dtype=float)
    return arr / resolution


def inf_rate_over_event(rate, event, resolution=2048, cap=1e6, m=2):
    """``inf I`` over an event for a positively homogeneous rate ``I``.

    Directions ``u`` on the unit simplex are scanned; along each, the entry
    scale ``lam(u)`` into the event is found by bisection and
    ``lam(u) * I(u)`` is minimised. For ``m = 2`` the best grid direction
    is refined by bounded scalar minimisation over its two neighbouring
    cells, which matters when the minimum sits at a kink. For ``m > 2`` the
    answer is limited by the lattice ``resolution`` (per simplex edge).
    """
    if m == 2:
        t = np.linspace(0.0, 1.0, resolution + 1)
        dirs = np.column_stack([1 - t, t])
    else:
        dirs = _simplex_lattice(m, resolution)
    lam = _ray_entry(event, dirs, cap)
    with np.errstate(invalid="ignore"):
        vals = np.where(np.isinf(lam), math.inf, lam * np.asarray(rate(dirs), dtype=float))
    vals = np.where(np.isnan(vals), math.inf, vals)
    if not np.any(np.isfinite(vals)):
        raise EmptyEventError("no ray enters the event within the scale cap")
    i = int(np.argmin(vals))
    best = float(vals[i])
    if m != 2:
        return best

    def f(tt):
        u = np.array([[1 - tt, tt]])
        lam1 = _ray_entry(event, u, cap)[0]
        if math.isinf(lam1):
            return math.inf
        return float(lam1 * np.asarray(rate(u), dtype=float).reshape(-1)[0])

    a = t[max(i - 1, 0)]
    b = t[min(i + 1, resolution)]
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
    if np.isfinite(res.fun) and res.fun < best:
        best = float(res.fun)
    return best


def rate_grid(rho, grid=200, upper=3.0):
    """Rows ``(x1, x2, I, kappa)`` on a square grid over ``[0, upper]^2``."""
    xs = np.linspace(0.0, upper, grid)
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([x1.ravel(), x2.ravel()], axis=1)
    i_vals = bivariate_rate(rho, pts[:, 0], pts[:, 1])
    k_vals = kappa_normal(rho, pts)
    return np.column_stack([pts, i_vals, k_vals])
