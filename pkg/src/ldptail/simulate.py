"""Seeded samples with Gaussian dependence and exact event probabilities.

Streams: realisation ``r`` of a study seeded with ``seed`` draws from
``PCG64(SeedSequence(seed, spawn_key=(r,)))``. Normal variates are inverse-CDF
transforms of uniforms, so a stream is fully determined by its uniforms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigError, DegenerateError, DomainError
from .special import bvn_upper_prob, exp_of_normal, normal_of_exp, std_normal_quantile, std_normal_sf
from .transform import Sample

MARGINAL_SCALES = ("normal", "exponential", "pareto")
_PIVOT_MIN = 1e-12


@dataclass(frozen=True)
class SimConfig:
    n: int
    correlation: tuple = ((1.0, 0.5), (0.5, 1.0))
    marginal_scale: str = "exponential"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.marginal_scale not in MARGINAL_SCALES:
            raise ConfigError(f"marginal_scale must be one of {MARGINAL_SCALES}")
        v = np.asarray(self.correlation, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ConfigError("correlation must be a square matrix")
        object.__setattr__(self, "correlation", tuple(tuple(float(a) for a in row) for row in v))

    @classmethod
    def bivariate(cls, n, rho, marginal_scale="exponential", seed=0):
        return cls(n=n, correlation=((1.0, rho), (rho, 1.0)), marginal_scale=marginal_scale, seed=seed)

    @property
    def m(self):
        return len(self.correlation)


def rng_for(seed: int, index=0) -> np.random.Generator:
    """Generator for substream ``index`` (an int or a tuple of ints) of ``seed``."""
    key = tuple(index) if isinstance(index, (tuple, list)) else (index,)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def cholesky_lower(v):
    """Lower Cholesky factor; raises if a pivot drops below 1e-12."""
    v = np.asarray(v, dtype=float)
    m = v.shape[0]
    if not np.array_equal(v, v.T):
        raise ConfigError("correlation matrix must be symmetric")
    L = np.zeros_like(v)
    for j in range(m):
        d = v[j, j] - L[j, :j] @ L[j, :j]
        if d < _PIVOT_MIN:
            raise ConfigError("correlation matrix is not positive definite")
        L[j, j] = math.sqrt(d)
        for i in range(j + 1, m):
            L[i, j] = (v[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def _open_uniforms(rng, shape):
    # k / 2**53 from rng.random(), shifted to the open interval (0, 1).
    return rng.random(shape) + 2.0**-54


def sample_mvn(cfg: SimConfig, realisation=0) -> Sample:
    """``n`` draws of ``U ~ N(0, V)`` mapped to the requested marginal scale.

    ``exponential``: ``Y = -log(1 - Phi(U))``; ``pareto``: ``exp(Y)``;
    ``normal``: ``U`` itself.
    """
    L = cholesky_lower(cfg.correlation)
    rng = rng_for(cfg.seed, realisation)
    z = special.ndtri(_open_uniforms(rng, (cfg.n, cfg.m)))
    u = z @ L.T
    if cfg.marginal_scale == "normal":
        x = u
    else:
        x = exp_of_normal(u)
        if cfg.marginal_scale == "pareto":
            x = np.exp(x)
    return Sample(x, tuple(f"x{j + 1}" for j in range(cfg.m)))


def halfspace_exact_prob(a, c, rho):
    """``P(a1 U1 + a2 U2 > c)`` for standard bivariate normal ``U``."""
    a1, a2 = (float(v) for v in a)
    if not abs(rho) < 1:
        raise DomainError("|rho| must be < 1")
    sigma2 = a1 * a1 + 2 * rho * a1 * a2 + a2 * a2
    if not sigma2 > 0:
        raise DegenerateError("a1 U1 + a2 U2 is degenerate")
    return float(std_normal_sf(c / math.sqrt(sigma2)))


def halfspace_threshold(a, rho, p):
    """Threshold ``c`` with ``halfspace_exact_prob(a, c, rho) == p``."""
    a1, a2 = (float(v) for v in a)
    sigma2 = a1 * a1 + 2 * rho * a1 * a2 + a2 * a2
    if not sigma2 > 0:
        raise DegenerateError("a1 U1 + a2 U2 is degenerate")
    return math.sqrt(sigma2) * -std_normal_quantile(p)


def corner_exact_prob(a, rho):
    """``P(Y1 > a1, Y2 > a2)`` for exponential-scale ``Y`` with normal dependence."""
    a1, a2 = (float(v) for v in a)
    if a1 < 0 or a2 < 0:
        raise DomainError("corner thresholds must be nonnegative")

    return bvn_upper_prob(rho, normal_of_exp(a1), normal_of_exp(a2))
