"""Simulation studies: halfspace comparison across a1, survival-function grid,
consistency ladder, plus the minimum-separation event counter.

Every realisation ``r`` draws from its own substream ``(seed, r)``, so
results do not depend on execution order or on the worker count.
Realisations whose estimate is zero (log undefined) are left out of the
log-error aggregates and reported in ``n_excluded``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ConfigError
from .estimators import (
    EstimatorConfig,
    ScalingPath,
    ShiftPath,
    estimate_classical,
    estimate_classical_rtd,
    estimate_eta_hill,
    estimate_ldp_I,
)
from .events import Corner, Halfspace
from .simulate import (
    SimConfig,
    corner_exact_prob,
    halfspace_exact_prob,
    halfspace_threshold,
    sample_mvn,
)
from .transform import PseudoSample, rank_transform

log = logging.getLogger(__name__)

SCENARIOS = ("fig2", "survival_grid", "consistency")
FIG2_A1 = (1.0, 0.5, 0.1, 0.0, -0.1, -0.5)
SURVIVAL_RATIOS = tuple(round(0.05 * i, 2) for i in range(1, 11))
FAST_REALISATIONS = 100


@dataclass(frozen=True)
class StudyConfig:
    scenario: str
    n: int = 5000
    k_n: int = 20
    xi: float = 1.0
    rho: float = 0.5
    a1_list: tuple = FIG2_A1
    a2: float = 1.0
    realisations: int = 500
    seed: int = 20151216
    p_target: float = 4e-8
    tau_list: tuple = (1.0,)
    n_list: tuple = (2000, 20000, 200000)
    kn_exponent: float = 0.3
    p_exponent: float = 2.0
    ratios: tuple = SURVIVAL_RATIOS
    x2_factor: float = 1.5
    k_eta: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        if self.realisations < 1:
            raise ConfigError("realisations must be >= 1")
        if self.n < 2 or not 1 <= self.k_n < self.n:
            raise ConfigError("need 1 <= k_n < n")
        if not self.xi > 0:
            raise ConfigError("xi must be positive")
        if not abs(self.rho) < 1:
            raise ConfigError("|rho| must be < 1")
        if not 0 < self.p_target < 1:
            raise ConfigError("p_target must be in (0, 1)")
        if any(t <= 0 for t in self.tau_list):
            raise ConfigError("tau values must be positive")
        for name in ("a1_list", "tau_list", "n_list", "ratios"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown study config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc

    def fast(self):
        return StudyConfig.from_dict({**asdict(self), "realisations": min(self.realisations, FAST_REALISATIONS)})


@dataclass
class StudyRow:
    scenario: str
    cell: str
    cell_value: float
    n: int
    method: str
    truth: float
    rmse_log: float
    bias_log: float
    median_abs_rel_log_error: float
    n_realisations: int
    n_excluded: int


@dataclass
class StudyReport:
    config: StudyConfig
    rows: list = field(default_factory=list)

    def to_dict(self):
        return {"config": asdict(self.config), "rows": [asdict(r) for r in self.rows]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        names = [f.name for f in fields(StudyRow)]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, k)) for k in names])
        return buf.getvalue()

    def to_text(self):
        hdr = f"{'cell':>10} {'n':>7} {'method':>14} {'truth':>10} {'rmse_log':>9} {'bias_log':>9} {'med|rel|':>9} {'excl':>5}"
        lines = [hdr]
        for r in self.rows:
            lines.append(
                f"{r.cell:>10} {r.n:>7d} {r.method:>14} {r.truth:>10.3g} {r.rmse_log:>9.3f} "
                f"{r.bias_log:>9.3f} {r.median_abs_rel_log_error:>9.4f} {r.n_excluded:>5d}"
            )
        return "\n".join(lines) + "\n"

    def row(self, cell_value, method, n=None):
        for r in self.rows:
            if r.cell_value == cell_value and r.method == method and (n is None or r.n == n):
                return r
        raise KeyError((cell_value, method, n))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def aggregate_log_errors(log_estimates, log_truth):
    """Return ``(rmse, bias, median |log_est / log_truth - 1|, n_used, n_excluded)``."""
    le = np.asarray(log_estimates, dtype=float)
    ok = np.isfinite(le)
    n_exc = int(le.size - ok.sum())
    if not ok.any():
        return math.nan, math.nan, math.nan, 0, n_exc
    err = le[ok] - log_truth
    rmse = float(np.sqrt(np.mean(err**2)))
    bias = float(np.mean(err))
    med = float(np.median(np.abs(le[ok] / log_truth - 1.0)))
    return rmse, bias, med, int(ok.sum()), n_exc


def _make_row(cfg, cell, value, n, method, truth, logs):
    rmse, bias, med, used, exc = aggregate_log_errors(logs, math.log(truth))
    return StudyRow(cfg.scenario, cell, float(value), int(n), method, float(truth),
                    rmse, bias, med, used, exc)


def _map(fn, args, workers):
    if workers <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*args)))


# -- fig2 ------------------------------------------------------------------

FIG2_METHODS = ("ldp-I", "classical", "classical-rtd")


def fig2_events(cfg):
    out = []
    for a1 in cfg.a1_list:
        c = halfspace_threshold((a1, cfg.a2), cfg.rho, cfg.p_target)
        out.append(Halfspace((a1, cfg.a2), c, "normal_of_exp"))
    return out


def _fig2_realisation(cfg, r):
    sample = sample_mvn(SimConfig.bivariate(cfg.n, cfg.rho, "exponential", cfg.seed), r)
    pseudo = rank_transform(sample)
    est_cfg = EstimatorConfig(k_n=cfg.k_n, xi=cfg.xi)
    eta = estimate_eta_hill(pseudo, cfg.k_eta or cfg.k_n)
    out = []
    for ev in fig2_events(cfg):
        rep_i = estimate_ldp_I(pseudo, None, ev, est_cfg)
        shift = ShiftPath(pseudo, None, ev)
        rep_c = estimate_classical(pseudo, ev, est_cfg, path=shift)
        rep_r = estimate_classical_rtd(pseudo, ev, est_cfg, path=shift, eta_hat=eta)
        out.append((rep_i.log_estimate, rep_c.log_estimate, rep_r.log_estimate))
    return out


def run_fig2(cfg: StudyConfig) -> StudyReport:
    """Halfspace events of fixed probability for each a1; RMSE/bias of log estimates."""
    if cfg.scenario != "fig2":
        raise ConfigError("run_fig2 needs scenario 'fig2'")
    res = _map(_fig2_realisation, [(cfg, r) for r in range(cfg.realisations)], cfg.workers)
    arr = np.array(res)  # (realisations, a1, method)
    report = StudyReport(cfg)
    for i, (a1, ev) in enumerate(zip(cfg.a1_list, fig2_events(cfg))):
        truth = halfspace_exact_prob(ev.coeffs, ev.threshold, cfg.rho)
        for j, method in enumerate(FIG2_METHODS):
            report.rows.append(_make_row(cfg, f"a1={a1:g}", a1, cfg.n, method, truth, arr[:, i, j]))
    return report


# -- survival grid -----------------------------------------------------------


def survival_events(cfg):
    x2 = cfg.x2_factor * math.log(cfg.n)
    return [Corner((ratio * x2, x2)) for ratio in cfg.ratios]


def _survival_realisation(cfg, r):
    sample = sample_mvn(SimConfig.bivariate(cfg.n, cfg.rho, "exponential", cfg.seed), r)
    pseudo = PseudoSample.from_exact(sample.values)
    est_cfg = EstimatorConfig(k_n=cfg.k_n, xi=cfg.xi)
    return [estimate_ldp_I(pseudo, None, ev, est_cfg).log_estimate for ev in survival_events(cfg)]


def run_survival_grid(cfg: StudyConfig) -> StudyReport:
    """Joint survival probabilities at ``x2 = 1.5 log n`` and ``x1 = ratio * x2``,
    estimated from exact exponential-scale samples."""
    if cfg.scenario != "survival_grid":
        raise ConfigError("run_survival_grid needs scenario 'survival_grid'")
    res = np.array(_map(_survival_realisation, [(cfg, r) for r in range(cfg.realisations)], cfg.workers))
    report = StudyReport(cfg)
    for i, (ratio, ev) in enumerate(zip(cfg.ratios, survival_events(cfg))):
        truth = corner_exact_prob(ev.thresholds, cfg.rho)
        report.rows.append(_make_row(cfg, f"x1/x2={ratio:g}", ratio, cfg.n, "ldp-I", truth, res[:, i]))
    return report


# -- consistency -------------------------------------------------------------


def consistency_k(n, exponent):
    return int(math.ceil(n**exponent))


def consistency_event(cfg, n, tau):
    """Halfspace with ``a = (a1_list[0], a2)`` and probability ``n ** (-p_exponent * tau)``."""
    a = (cfg.a1_list[0], cfg.a2)
    p = n ** (-cfg.p_exponent * tau)
    return Halfspace(a, halfspace_threshold(a, cfg.rho, p), "normal_of_exp"), p


def _consistency_realisation(cfg, n, r):
    sample = sample_mvn(SimConfig.bivariate(n, cfg.rho, "exponential", cfg.seed), (n, r))
    pseudo = rank_transform(sample)
    est_cfg = EstimatorConfig(k_n=consistency_k(n, cfg.kn_exponent), xi=cfg.xi)
    out = []
    for tau in cfg.tau_list:
        ev, _ = consistency_event(cfg, n, tau)
        out.append(estimate_ldp_I(pseudo, None, ev, est_cfg).log_estimate)
    return out


def run_consistency(cfg: StudyConfig) -> StudyReport:
    """Median ``|log pi_hat / log p - 1|`` over a ladder of sample sizes."""
    if cfg.scenario != "consistency":
        raise ConfigError("run_consistency needs scenario 'consistency'")
    if not cfg.tau_list:
        raise ConfigError("consistency needs a non-empty tau_list")
    report = StudyReport(cfg)
    for n in cfg.n_list:
        log.info("consistency: n=%d", n)
        res = np.array(_map(_consistency_realisation, [(cfg, n, r) for r in range(cfg.realisations)], cfg.workers))
        for i, tau in enumerate(cfg.tau_list):
            _, p = consistency_event(cfg, n, tau)
            report.rows.append(_make_row(cfg, f"tau={tau:g}", tau, n, "ldp-I", p, res[:, i]))
    return report


RUNNERS = {"fig2": run_fig2, "survival_grid": run_survival_grid, "consistency": run_consistency}


def run_study(cfg: StudyConfig) -> StudyReport:
    return RUNNERS[cfg.scenario](cfg)


# -- storm counting ----------------------------------------------------------


def count_separated_events(flags, min_gap: int) -> int:
    """Number of clusters of true flags, where a new cluster starts only
    after more than ``min_gap`` consecutive false observations."""
    if min_gap < 1:
        raise ConfigError("min_gap must be >= 1")
    clusters = 0
    gap = None
    for f in flags:
        if f:
            if gap is None or gap > min_gap:
                clusters += 1
            gap = 0
        elif gap is not None:
            gap += 1
    return clusters
