"""Rank transform to exponential-scale pseudo-observations, the fitted
marginal map and empirical probabilities."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, DimensionError
from .marginal import LogGwTailFit, SortedMarginal, quantile_hat


class TieWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Sample:
    """``n`` points in ``R^m`` with column labels."""

    values: np.ndarray
    column_names: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1:
            raise DataError("a sample needs at least one row")
        if not np.all(np.isfinite(v)):
            raise DataError("sample contains non-finite values")
        names = tuple(self.column_names) or tuple(f"x{j + 1}" for j in range(v.shape[1]))
        if len(names) != v.shape[1]:
            raise DataError("column_names length does not match the number of columns")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def m(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class PseudoSample:
    """Exponential-scale pseudo-observations and the ranks they came from.

    ``ranks`` is ``None`` when the rows are exact exponential-scale values
    rather than rank transforms.
    """

    rows: np.ndarray
    ranks: np.ndarray | None = None
    tie_columns: tuple = field(default=())

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def m(self):
        return self.rows.shape[1]

    @classmethod
    def from_exact(cls, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        return cls(rows=y)


def plotting_positions(n: int) -> np.ndarray:
    """The grid ``-log(1 - (i - 1/2) / n)`` for ``i = 1..n``."""
    i = np.arange(1, n + 1, dtype=float)
    return -np.log1p(-(i - 0.5) / n)


def _ranks(col):
    order = np.argsort(col, kind="stable")
    r = np.empty(col.size, dtype=np.int64)
    r[order] = np.arange(1, col.size + 1)
    return r


def rank_transform(sample) -> PseudoSample:
    """Marginal ranks and ``Y_hat = -log(1 - (R - 1/2) / n)``.

    Ties are broken by input order; affected columns are listed in
    ``tie_columns`` and a :class:`TieWarning` is issued.
    """
    x = sample.values if isinstance(sample, Sample) else np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, m = x.shape
    if n < 1:
        raise DataError("rank_transform needs at least one row")
    ranks = np.column_stack([_ranks(x[:, j]) for j in range(m)])
    ties = tuple(j for j in range(m) if np.unique(x[:, j]).size < n)
    if ties:
        warnings.warn(
            f"tied values in column(s) {list(ties)}; ranks assigned by input order",
            TieWarning,
            stacklevel=2,
        )
    grid = plotting_positions(n)
    rows = grid[ranks - 1]
    return PseudoSample(rows=rows, ranks=ranks, tie_columns=ties)


class QHatMap:
    """Coordinatewise fitted quantile map ``x -> (q_hat_1(x_1), ..., q_hat_m(x_m))``."""

    def __init__(self, fits, margs):
        if len(fits) != len(margs):
            raise ConfigError("fits and marginals differ in length")
        self.fits = list(fits)
        self.margs = list(margs)

    @property
    def m(self):
        return len(self.fits)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.m:
            raise DimensionError(f"expected points of dimension {self.m}, got {x.shape[-1]}")
        out = np.empty_like(x)
        for j, (fit, mg) in enumerate(zip(self.fits, self.margs)):
            out[..., j] = quantile_hat(fit, mg, x[..., j])
        return out


def q_hat_map(fits, margs, x):
    return QHatMap(fits, margs)(x)


def identity_map(x):
    """Known-marginals map when the data are already on the exponential scale."""
    return np.asarray(x, dtype=float)


def empirical_probability(flags) -> float:
    flags = np.asarray(flags, dtype=bool)
    if flags.size < 1:
        raise ConfigError("empirical_probability needs at least one flag")
    return float(np.count_nonzero(flags)) / flags.size
