"""Inequality, mobility and income indicators of a class distribution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePopulationError, DomainError
from .model import ExchangeModel, IncomeLadder, PaymentMatrix

__all__ = [
    "total_income",
    "gini",
    "lorenz_curve",
    "mobility",
    "IndicatorSeries",
    "indicator_series",
]


def total_income(x: np.ndarray, r: np.ndarray) -> float:
    """Total (= per-capita average) income of the distribution."""
    return float(np.asarray(x, dtype=np.float64) @ np.asarray(r, dtype=np.float64))


def gini(x: np.ndarray, r: np.ndarray) -> float:
    """Gini index via the mean-absolute-difference form.

    G = sum_{i,j} x_i x_j |r_i - r_j| / (2 mu), which equals the ratio of
    the area between the Lorenz curve and the diagonal to the area under
    the diagonal for a discrete class distribution (see
    :func:`lorenz_curve`, which serves as the independent oracle).
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    mu = float(x @ r)
    if mu <= 0.0:
        raise DomainError(f"Gini undefined for total income {mu}")
    diff = np.abs(r[:, None] - r[None, :])
    return float(x @ diff @ x / (2.0 * mu))


def lorenz_curve(x: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Lorenz polyline: (cumulative population, cumulative income share).

    n + 1 points from (0, 0) to (1, 1); classes are taken in income order,
    which for the ladder is the storage order.  Nondecreasing and convex.
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    mu = float(x @ r)
    if mu <= 0.0:
        raise DomainError(f"Lorenz curve undefined for total income {mu}")
    pts = np.zeros((x.size + 1, 2))
    pts[1:, 0] = np.cumsum(x)
    pts[1:, 1] = np.cumsum(x * r) / mu
    return pts


def gini_from_lorenz(points: np.ndarray) -> float:
    """Area-ratio Gini from a Lorenz polyline (trapezoid rule)."""
    f = points[:, 0]
    l = points[:, 1]
    area = float(np.sum((f[1:] - f[:-1]) * (l[1:] + l[:-1])) / 2.0)
    return 1.0 - 2.0 * area


def mobility(x: np.ndarray, payments: PaymentMatrix, ladder: IncomeLadder) -> float:
    """Collective probability of class advancement of the interior classes.

    M = [1 / (1 - x_1 - x_n)] * sum_{i=2}^{n-1} sum_k
        [s_unit / (r_{i+1} - r_i)] p[k, i] x_k x_i,

    i.e. the chance that an interior individual receives a payment and
    climbs, normalized by the interior population.  Undefined when the
    whole population sits in the boundary classes.
    """
    x = np.asarray(x, dtype=np.float64)
    interior = 1.0 - x[0] - x[-1]
    if interior <= 0.0:
        raise DegeneratePopulationError(
            "mobility undefined: no population in the interior classes"
        )
    r = ladder.r
    received = x @ payments.p  # received[i] = sum_k x_k p[k, i]
    weights = ladder.s_unit / (r[1:] - r[:-1])  # weights[i-1] pairs with class i
    core = float(np.sum(weights[1:] * x[1:-1] * received[1:-1]))
    return core / interior


@dataclass(frozen=True, eq=False)
class IndicatorSeries:
    """Per-instant indicator values along a trajectory."""

    t: np.ndarray
    g: np.ndarray
    m: np.ndarray
    mu: np.ndarray


def indicator_series(times: np.ndarray, states: np.ndarray, model: ExchangeModel) -> IndicatorSeries:
    """Vectorized (G, M, mu) over a whole (m, n) block of sampled states."""
    r = model.ladder.r
    states = np.asarray(states, dtype=np.float64)
    mu = states @ r
    diff = np.abs(r[:, None] - r[None, :])
    g = np.einsum("ti,ij,tj->t", states, diff, states) / (2.0 * mu)
    received = states @ model.payments.p
    weights = model.ladder.s_unit / (r[1:] - r[:-1])
    core = (states[:, 1:-1] * received[:, 1:-1]) @ weights[1:]
    interior = 1.0 - states[:, 0] - states[:, -1]
    if np.any(interior <= 0.0):
        raise DegeneratePopulationError(
            "mobility undefined at some sampled instant: empty interior"
        )
    m = core / interior
    return IndicatorSeries(t=np.asarray(times, dtype=np.float64), g=g, m=m, mu=mu)
