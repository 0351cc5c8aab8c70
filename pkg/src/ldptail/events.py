"""Extreme events as membership predicates in data space, and the per-point
critical scales / shifts along which the estimators stretch the sample.

Events are small immutable trees::

    Halfspace(coeffs, threshold, margin_map)   a . phi(x) > c
    Corner(thresholds)                         x_j > a_j for all j
    AllOf(children), AnyOf(children)
    Custom(predicate)                          library use only

``contains`` accepts a single point of shape ``(m,)`` or a batch ``(n, m)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DimensionError, MonotonicityError
from .special import normal_of_exp

MARGIN_MAPS = ("identity", "normal_of_exp")

DEFAULT_L_MIN = 1e-3
DEFAULT_L_MAX = 1e3
DEFAULT_TOL = 1e-6
DEFAULT_S_MAX = 1e3
MONOTONE_SAMPLES = 16


@dataclass(frozen=True)
class Halfspace:
    coeffs: tuple
    threshold: float
    margin_map: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "threshold", float(self.threshold))
        if self.margin_map not in MARGIN_MAPS:
            raise ConfigError(f"unknown margin_map {self.margin_map!r}")

    @property
    def dim(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class Corner:
    thresholds: tuple

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(a) for a in self.thresholds))

    @property
    def dim(self):
        return len(self.thresholds)


@dataclass(frozen=True)
class AllOf:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ConfigError("all_of needs at least one child")

    @property
    def dim(self):
        return _common_dim(self.children)


@dataclass(frozen=True)
class AnyOf:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ConfigError("any_of needs at least one child")

    @property
    def dim(self):
        return _common_dim(self.children)


@dataclass(frozen=True)
class Custom:
    """Opaque predicate. With ``vectorized=True`` it is called with an
    ``(n, m)`` array and must return ``n`` booleans; otherwise it is called
    once per point."""

    predicate: Callable = field(compare=False)
    dim: int | None = None
    vectorized: bool = True


def _common_dim(children):
    dims = {c.dim for c in children if c.dim is not None}
    if len(dims) > 1:
        raise DimensionError(f"children disagree on dimension: {sorted(dims)}")
    return dims.pop() if dims else None


def _eval(event, pts):
    if isinstance(event, Halfspace):
        if pts.shape[1] != event.dim:
            raise DimensionError(f"halfspace of dimension {event.dim} got points of dimension {pts.shape[1]}")
        lhs = np.zeros(pts.shape[0])
        for j, a in enumerate(event.coeffs):
            if a == 0.0:
                continue
            xj = pts[:, j]
            if event.margin_map == "normal_of_exp":
                xj = normal_of_exp(np.maximum(xj, 0.0))
            lhs = lhs + a * xj
        with np.errstate(invalid="ignore"):
            return lhs > event.threshold
    if isinstance(event, Corner):
        if pts.shape[1] != event.dim:
            raise DimensionError(f"corner of dimension {event.dim} got points of dimension {pts.shape[1]}")
        return np.all(pts > np.asarray(event.thresholds), axis=1)
    if isinstance(event, AllOf):
        out = np.ones(pts.shape[0], dtype=bool)
        for c in event.children:
            out &= _eval(c, pts)
        return out
    if isinstance(event, AnyOf):
        out = np.zeros(pts.shape[0], dtype=bool)
        for c in event.children:
            out |= _eval(c, pts)
        return out
    if isinstance(event, Custom):
        if event.dim is not None and pts.shape[1] != event.dim:
            raise DimensionError(f"custom event of dimension {event.dim} got points of dimension {pts.shape[1]}")
        if event.vectorized:
            return np.asarray(event.predicate(pts), dtype=bool).reshape(pts.shape[0])
        return np.fromiter((bool(event.predicate(p)) for p in pts), dtype=bool, count=pts.shape[0])
    raise ConfigError(f"not an event: {event!r}")


def contains(event, point):
    """Membership of one point (returns bool) or of a batch (returns array)."""
    pts = np.asarray(point, dtype=float)
    if pts.ndim == 1:
        return bool(_eval(event, pts[None, :])[0])
    if pts.ndim != 2:
        raise DimensionError("points must have shape (m,) or (n, m)")
    return _eval(event, pts)


# -- JSON ------------------------------------------------------------------


def event_from_dict(d):
    try:
        kind = d["type"]
        if kind == "halfspace":
            return Halfspace(d["coeffs"], d["threshold"], d.get("margin_map", "identity"))
        if kind == "corner":
            return Corner(d["thresholds"])
        if kind == "all_of":
            return AllOf(tuple(event_from_dict(c) for c in d["children"]))
        if kind == "any_of":
            return AnyOf(tuple(event_from_dict(c) for c in d["children"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed event specification: {exc}") from exc
    raise ConfigError(f"unknown event type {d.get('type')!r}")


def event_to_dict(event):
    if isinstance(event, Halfspace):
        return {"type": "halfspace", "coeffs": list(event.coeffs),
                "threshold": event.threshold, "margin_map": event.margin_map}
    if isinstance(event, Corner):
        return {"type": "corner", "thresholds": list(event.thresholds)}
    if isinstance(event, AllOf):
        return {"type": "all_of", "children": [event_to_dict(c) for c in event.children]}
    if isinstance(event, AnyOf):
        return {"type": "any_of", "children": [event_to_dict(c) for c in event.children]}
    raise ConfigError("custom events have no JSON form")


def load_event(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return event_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


# -- critical scales -------------------------------------------------------


@dataclass(frozen=True)
class CriticalScale:
    """Per-point largest stretch ``l`` with ``q_map(y / l)`` inside the event.

    ``values[i] == 0`` means the point is outside at ``l_min``;
    ``saturated[i]`` means it is still inside at ``l_max``.
    """

    values: np.ndarray
    saturated: np.ndarray
    monotonicity_verified: bool


def critical_scales(event, q_map, yhat, l_min=DEFAULT_L_MIN, l_max=DEFAULT_L_MAX,
                    tol=DEFAULT_TOL) -> CriticalScale:
    """Critical scales for every row of ``yhat`` by bracketing and bisection.

    Membership along ``l -> q_map(y / l)`` is sampled at 16 log-spaced scales
    and must be nonincreasing in ``l``; otherwise :class:`MonotonicityError`
    is raised and callers are expected to fall back to counting on a grid.
    The returned value for each point is inside the event (the lower end of
    the final bracket), within ``tol`` of the exact boundary.
    """
    if not 0.0 < l_min < l_max:
        raise ConfigError("need 0 < l_min < l_max")
    y = np.atleast_2d(np.asarray(yhat, dtype=float))
    n = y.shape[0]
    grid = np.geomspace(l_min, l_max, MONOTONE_SAMPLES)
    member = np.column_stack([_eval(event, q_map(y / l)) for l in grid])
    bad = np.any(member[:, 1:] & ~member[:, :-1], axis=1)
    if np.any(bad):
        raise MonotonicityError(
            f"membership not monotone along the scaling path for {int(bad.sum())} point(s)",
            int(bad.sum()),
        )
    values = np.zeros(n)
    saturated = member[:, -1].copy()
    values[saturated] = l_max
    active = member[:, 0] & ~saturated
    if np.any(active):
        j = member[active].sum(axis=1) - 1
        lo = grid[j]
        hi = grid[j + 1]
        ya = y[active]
        while np.max(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            inside = _eval(event, q_map(ya / mid[:, None]))
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        values[active] = lo
    return CriticalScale(values=values, saturated=saturated, monotonicity_verified=True)


def critical_scale(event, q_map, yhat_point, l_min=DEFAULT_L_MIN, l_max=DEFAULT_L_MAX,
                   tol=DEFAULT_TOL) -> float:
    """Single-point version of :func:`critical_scales`."""
    cs = critical_scales(event, q_map, np.asarray(yhat_point, dtype=float)[None, :],
                         l_min, l_max, tol)
    return float(cs.values[0])


def critical_shifts(event, q_map, yhat, s_max=DEFAULT_S_MAX, tol=DEFAULT_TOL):
    """Per-point smallest shift ``s >= 0`` with ``q_map(y + s*1)`` in the event.

    Returns an array with ``inf`` for points that stay outside up to ``s_max``.
    Raises :class:`MonotonicityError` if membership is not nondecreasing in
    ``s`` at the sampled shifts.
    """
    y = np.atleast_2d(np.asarray(yhat, dtype=float))
    n = y.shape[0]
    grid = np.concatenate([[0.0], np.geomspace(1e-3, s_max, MONOTONE_SAMPLES - 1)])
    member = np.column_stack([_eval(event, q_map(y + s)) for s in grid])
    bad = np.any(member[:, :-1] & ~member[:, 1:], axis=1)
    if np.any(bad):
        raise MonotonicityError(
            f"membership not monotone along the shift path for {int(bad.sum())} point(s)",
            int(bad.sum()),
        )
    out = np.full(n, math.inf)
    out[member[:, 0]] = 0.0
    active = member[:, -1] & ~member[:, 0]
    if np.any(active):
        j = (~member[active]).sum(axis=1)
        lo = grid[j - 1]
        hi = grid[j]
        ya = y[active]
        while np.max(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            inside = _eval(event, q_map(ya + mid[:, None]))
            hi = np.where(inside, mid, hi)
            lo = np.where(inside, lo, mid)
        out[active] = hi
    return out
