"""Probability estimators for extreme events.

* ``ldp-I``: ``(k/n) ** (xi / ell_plus)`` where ``ell_plus`` is the largest
  stretch ``l`` at which at least ``n (k/n)**xi`` points of ``Q(Y_hat / l)``
  lie in the event.
* ``ldp-II``: ``p_hat(l) ** (1 / l)`` for a stretch ``l`` in
  ``[ell_minus, ell_plus]``.
* ``classical``: ``(k/n) exp(-lambda)`` with ``lambda`` the smallest shift
  along the diagonal putting ``k`` points of ``Y_hat + lambda`` in the event.
* ``classical-rtd``: as ``classical`` but with the shift attenuated at rate
  ``1/eta``, ``eta`` the residual tail dependence index estimated by a Hill
  estimator on ``min_j Y_hat_j``. This correction is our own reading of the
  usual residual-dependence adjustment and is labelled as such in reports.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateError, MonotonicityError
from .events import (
    DEFAULT_L_MAX,
    DEFAULT_L_MIN,
    DEFAULT_S_MAX,
    DEFAULT_TOL,
    _eval,
    critical_scales,
    critical_shifts,
)
from .transform import PseudoSample, identity_map

GRID_SIZE = 512
_COUNT_SLACK = 1e-9
_CHUNK = 1 << 20

RTD_NOTE = "classical-rtd uses (k/n)*exp(-lambda/eta_hat); an interpretation, not a published formula"


@dataclass(frozen=True)
class EstimatorConfig:
    k_n: int
    xi: float = 1.0
    vartheta: float | None = None
    target_count: int | None = None

    def __post_init__(self):
        if self.k_n < 1:
            raise ConfigError("k_n must be >= 1")
        if not self.xi > 0:
            raise ConfigError("xi must be positive")
        vt = self.xi if self.vartheta is None else float(self.vartheta)
        if not 0 < vt <= self.xi:
            raise ConfigError("vartheta must lie in (0, xi]")
        object.__setattr__(self, "vartheta", vt)
        if self.target_count is not None and self.target_count < 1:
            raise ConfigError("target_count must be >= 1")

    def check_n(self, n):
        if not self.k_n < n:
            raise ConfigError(f"k_n={self.k_n} must be smaller than n={n}")


@dataclass
class EstimateReport:
    estimate: float
    method: str
    log_estimate: float = math.nan
    ell_plus: float | None = None
    ell_minus: float | None = None
    ell_used: float | None = None
    count_at_ell: int | None = None
    lambda_shift: float | None = None
    eta_hat: float | None = None
    n: int | None = None
    k_n: int | None = None
    saturated: bool = False
    underflow: bool = False
    path_mode: str | None = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def required_count(n, k_n, power):
    """Smallest integer count ``c`` with ``c / n >= (k_n / n) ** power``."""
    x = n * (k_n / n) ** power
    return max(1, int(math.ceil(x - _COUNT_SLACK * max(x, 1.0))))


def _rows(pseudo):
    rows = pseudo.rows if isinstance(pseudo, PseudoSample) else np.asarray(pseudo, dtype=float)
    return np.atleast_2d(rows)


def _count_matrix(event, pts_fn, grid):
    counts = np.empty(grid.size, dtype=np.int64)
    for i, g in enumerate(grid):
        counts[i] = np.count_nonzero(_eval(event, pts_fn(g)))
    return counts


class ScalingPath:
    """Counts of ``q_map(y / l)`` inside an event as a function of ``l``.

    With a monotone path the per-point critical scales are computed once and
    every query is an order statistic. Otherwise counts are evaluated on a
    ``GRID_SIZE``-point log grid over ``[l_min, l_max]`` and the crossing is
    refined by bisection on the count; features narrower than one grid step
    (a factor ``(l_max/l_min)**(1/(GRID_SIZE-1))``) can be missed.
    """

    def __init__(self, pseudo, q_map, event, l_min=DEFAULT_L_MIN, l_max=DEFAULT_L_MAX,
                 tol=DEFAULT_TOL, force_grid=False):
        self.y = _rows(pseudo)
        self.n = self.y.shape[0]
        self.q_map = identity_map if q_map is None else q_map
        self.event = event
        self.l_min, self.l_max, self.tol = l_min, l_max, tol
        self.scales = None
        self._grid_counts = None
        if not force_grid:
            try:
                cs = critical_scales(event, self.q_map, self.y, l_min, l_max, tol)
                self.scales = np.sort(cs.values)[::-1]
            except MonotonicityError:
                pass
        self.mode = "order-statistics" if self.scales is not None else "grid"

    def count(self, l):
        return int(np.count_nonzero(_eval(self.event, self.q_map(self.y / l))))

    def count_at(self, l):
        if l <= 0:
            return self.n
        if self.scales is not None:
            return int(np.count_nonzero(self.scales >= l))
        return self.count(l)

    def sup_scale(self, required):
        """``sup{l : count(l) >= required}`` with ``sup(empty) = 0``.

        Returns ``(l, saturated)``.
        """
        if required > self.n:
            return 0.0, False
        if self.scales is not None:
            l = float(self.scales[required - 1])
            return l, l >= self.l_max
        grid = np.geomspace(self.l_min, self.l_max, GRID_SIZE)
        if self._grid_counts is None:
            self._grid_counts = _count_matrix(self.event, lambda l: self.q_map(self.y / l), grid)
        ok = np.nonzero(self._grid_counts >= required)[0]
        if ok.size == 0:
            return 0.0, False
        i = ok[-1]
        if i == grid.size - 1:
            return float(self.l_max), True
        lo, hi = grid[i], grid[i + 1]
        while hi - lo > self.tol:
            mid = 0.5 * (lo + hi)
            if self.count(mid) >= required:
                lo = mid
            else:
                hi = mid
        return float(lo), False


class ShiftPath:
    """Counts of ``q_map(y + s)`` inside an event as a function of ``s >= 0``."""

    def __init__(self, pseudo, q_map, event, s_max=DEFAULT_S_MAX, tol=DEFAULT_TOL,
                 force_grid=False):
        self.y = _rows(pseudo)
        self.n = self.y.shape[0]
        self.q_map = identity_map if q_map is None else q_map
        self.event = event
        self.s_max, self.tol = s_max, tol
        self.shifts = None
        if not force_grid:
            try:
                self.shifts = np.sort(critical_shifts(event, self.q_map, self.y, s_max, tol))
            except MonotonicityError:
                pass
        self.mode = "order-statistics" if self.shifts is not None else "grid"

    def count(self, s):
        return int(np.count_nonzero(_eval(self.event, self.q_map(self.y + s))))

    def inf_shift(self, required):
        """``inf{s >= 0 : count(s) >= required}``; ``inf`` if never reached."""
        if required > self.n:
            return math.inf
        if self.shifts is not None:
            return float(self.shifts[required - 1])
        grid = np.concatenate([[0.0], np.geomspace(1e-3, self.s_max, GRID_SIZE - 1)])
        counts = _count_matrix(self.event, lambda s: self.q_map(self.y + s), grid)
        ok = np.nonzero(counts >= required)[0]
        if ok.size == 0:
            return math.inf
        i = ok[0]
        if i == 0:
            return 0.0
        lo, hi = grid[i - 1], grid[i]
        while hi - lo > self.tol:
            mid = 0.5 * (lo + hi)
            if self.count(mid) >= required:
                hi = mid
            else:
                lo = mid
        return float(hi)


def _path(pseudo, q_map, event, path):
    return path if path is not None else ScalingPath(pseudo, q_map, event)


def ell_plus(pseudo, q_map, event, cfg: EstimatorConfig, path=None):
    p = _path(pseudo, q_map, event, path)
    cfg.check_n(p.n)
    return p.sup_scale(required_count(p.n, cfg.k_n, cfg.xi))[0]


def ell_minus(pseudo, q_map, event, cfg: EstimatorConfig, path=None):
    p = _path(pseudo, q_map, event, path)
    cfg.check_n(p.n)
    return p.sup_scale(required_count(p.n, cfg.k_n, cfg.vartheta))[0]


# -- closed forms from the scale/shift/count ------------------------------


def ldp_I_from_scale(k_n, n, xi, ell):
    """``(k/n) ** (xi / ell)`` as ``(estimate, log_estimate)``; zero if ``ell == 0``."""
    if ell <= 0:
        return 0.0, -math.inf
    log_est = xi / ell * math.log(k_n / n)
    return math.exp(log_est), log_est


def ldp_II_from_count(count, n, ell):
    if count <= 0 or ell <= 0:
        return 0.0, -math.inf
    log_est = math.log(count / n) / ell
    return math.exp(log_est), log_est


def classical_from_shift(k_n, n, lam, eta=1.0):
    """``(k/n) * exp(-lam / eta)``."""
    if math.isinf(lam):
        return 0.0, -math.inf
    log_est = math.log(k_n / n) - lam / eta
    return math.exp(log_est), log_est


# -- estimators ------------------------------------------------------------


def estimate_ldp_I(pseudo, q_map, event, cfg: EstimatorConfig, path=None) -> EstimateReport:
    p = _path(pseudo, q_map, event, path)
    cfg.check_n(p.n)
    lp, sat = p.sup_scale(required_count(p.n, cfg.k_n, cfg.xi))
    lm = p.sup_scale(required_count(p.n, cfg.k_n, cfg.vartheta))[0]
    est, log_est = ldp_I_from_scale(cfg.k_n, p.n, cfg.xi, lp)
    return EstimateReport(
        estimate=est, log_estimate=log_est, method="ldp-I", ell_plus=lp, ell_minus=lm,
        ell_used=lp, count_at_ell=p.count_at(lp) if lp > 0 else 0, n=p.n, k_n=cfg.k_n,
        saturated=sat, underflow=lp <= 0 or est == 0.0, path_mode=p.mode,
    )


def estimate_ldp_II(pseudo, q_map, event, cfg: EstimatorConfig, path=None, ell=None) -> EstimateReport:
    """Estimator with a free stretch in ``[ell_minus, ell_plus]``.

    The stretch is ``ell`` if given, else the largest ``l`` whose count
    reaches ``cfg.target_count`` if set, else ``ell_plus``.
    """
    p = _path(pseudo, q_map, event, path)
    cfg.check_n(p.n)
    lp, sat = p.sup_scale(required_count(p.n, cfg.k_n, cfg.xi))
    lm = p.sup_scale(required_count(p.n, cfg.k_n, cfg.vartheta))[0]
    if ell is None:
        ell = p.sup_scale(cfg.target_count)[0] if cfg.target_count is not None else lp
    if not lm - p.tol <= ell <= lp + p.tol:
        raise ConfigError(f"chosen stretch {ell} outside [ell_minus, ell_plus] = [{lm}, {lp}]")
    count = p.count_at(ell) if ell > 0 else 0
    est, log_est = ldp_II_from_count(count, p.n, ell)
    return EstimateReport(
        estimate=est, log_estimate=log_est, method="ldp-II", ell_plus=lp, ell_minus=lm,
        ell_used=ell, count_at_ell=count, n=p.n, k_n=cfg.k_n, saturated=sat,
        underflow=est == 0.0, path_mode=p.mode,
    )


def estimate_classical(pseudo, event, cfg: EstimatorConfig, q_map=None, path=None) -> EstimateReport:
    p = path if path is not None else ShiftPath(pseudo, q_map, event)
    cfg.check_n(p.n)
    lam = p.inf_shift(cfg.k_n)
    est, log_est = classical_from_shift(cfg.k_n, p.n, lam)
    return EstimateReport(
        estimate=est, log_estimate=log_est, method="classical", lambda_shift=lam,
        n=p.n, k_n=cfg.k_n, underflow=est == 0.0, path_mode=p.mode,
    )


def estimate_eta_hill(pseudo, k_eta: int) -> float:
    """Residual tail dependence index from ``T = min_j Y_hat_j``.

    Mean excess of the ``k_eta`` largest ``T`` over the ``(n - k_eta)``-th
    order statistic, clamped to ``(0, 1]``.
    """
    y = _rows(pseudo)
    n = y.shape[0]
    if not 1 <= k_eta < n:
        raise ConfigError(f"k_eta must satisfy 1 <= k_eta < n, got {k_eta}")
    t = np.sort(y.min(axis=1))
    if t[0] == t[-1]:
        raise DegenerateError("all componentwise minima are equal")
    eta = float(np.mean(t[n - k_eta:] - t[n - k_eta - 1]))
    if eta <= 0:
        raise DegenerateError("top order statistics of the minima are tied")
    return min(eta, 1.0)


def estimate_classical_rtd(pseudo, event, cfg: EstimatorConfig, k_eta=None, q_map=None,
                           path=None, eta_hat=None) -> EstimateReport:
    p = path if path is not None else ShiftPath(pseudo, q_map, event)
    cfg.check_n(p.n)
    if eta_hat is None:
        eta_hat = estimate_eta_hill(p.y, cfg.k_n if k_eta is None else k_eta)
    lam = p.inf_shift(cfg.k_n)
    est, log_est = classical_from_shift(cfg.k_n, p.n, lam, eta_hat)
    return EstimateReport(
        estimate=est, log_estimate=log_est, method="classical-rtd", lambda_shift=lam,
        eta_hat=eta_hat, n=p.n, k_n=cfg.k_n, underflow=est == 0.0, path_mode=p.mode,
        notes=[RTD_NOTE],
    )
