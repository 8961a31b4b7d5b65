"""Realization ensembles, correlation aggregation and income sweeps.

Every realization derives its own random stream from (seed, index), so
results are independent of worker scheduling; aggregation is a
deterministic fold over the index-ordered stats.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateSeriesError, EnsembleError, KinexError
from .indicators import gini, indicator_series
from .model import ExchangeModel, equilibrium_for_income
from .sde import SimulationConfig, Trajectory, run_trajectory

__all__ = [
    "pearson",
    "ClosenessDiagnostics",
    "RealizationStats",
    "EnsembleReport",
    "run_ensemble",
    "closeness_diagnostics",
    "SweepResult",
    "sweep_mu",
    "sign_changes",
    "zero_crossings",
]


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Sample Pearson correlation of two equal-length series."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("need two 1-d series of equal length >= 2")
    da = a - a.mean()
    db = b - b.mean()
    va = float(da @ da)
    vb = float(db @ db)
    if va == 0.0 or vb == 0.0:
        raise DegenerateSeriesError("correlation undefined for a zero-variance series")
    return float((da @ db) / math.sqrt(va * vb))


@dataclass(frozen=True, eq=False)
class ClosenessDiagnostics:
    """How far a trajectory wandered from its starting distribution.

    ``mean_shift`` is the per-component time average minus the initial
    value, ``sigma`` the per-component standard deviation, and
    ``relative_sigma`` their ratio sigma / time-average.
    """

    mean_shift: np.ndarray
    sigma: np.ndarray
    relative_sigma: np.ndarray


def closeness_diagnostics(traj: Trajectory, x0: np.ndarray, stride: int = 1) -> ClosenessDiagnostics:
    """Diagnostics over the values attained during evolution (initial state
    excluded, matching the per-step sampling convention)."""
    if traj.states.shape[0] < 2:
        raise ValueError("trajectory holds no evolved samples")
    evolved = traj.states[stride::stride]
    mean = evolved.mean(axis=0)
    sigma = evolved.std(axis=0)
    return ClosenessDiagnostics(
        mean_shift=mean - np.asarray(x0, dtype=np.float64),
        sigma=sigma,
        relative_sigma=sigma / mean,
    )


@dataclass(frozen=True, eq=False)
class RealizationStats:
    """Correlations and closeness of one realization.  The correlations
    against mu are None in income-conserving mode, where the mu series is
    constant by construction."""

    index: int
    r_gm: float
    r_gmu: float | None
    r_mmu: float | None
    closeness: ClosenessDiagnostics


def _mean_se(values: list[float], spread: str) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    sd = float(arr.std(ddof=1))
    if spread == "std":
        return float(arr.mean()), sd
    return float(arr.mean()), sd / math.sqrt(arr.size)


@dataclass(frozen=True, eq=False)
class EnsembleReport:
    """Per-realization stats plus aggregate mean and spread of each
    correlation.  ``spread`` records whether the +/- values are standard
    errors of the mean (default) or sample standard deviations."""

    realizations: tuple[RealizationStats, ...]
    failed: tuple[int, ...]
    mean_r_gm: float
    se_r_gm: float
    mean_r_gmu: float | None
    se_r_gmu: float | None
    mean_r_mmu: float | None
    se_r_mmu: float | None
    config: SimulationConfig
    model_n: int
    model_delta_r: float
    model_s_unit: float
    x0: np.ndarray
    spread: str

    def mean_abs_shift(self) -> np.ndarray:
        """Ensemble mean of |time-average - initial| per component."""
        return np.mean([np.abs(s.closeness.mean_shift) for s in self.realizations], axis=0)

    def mean_sigma(self) -> np.ndarray:
        return np.mean([s.closeness.sigma for s in self.realizations], axis=0)

    def mean_relative_sigma(self) -> np.ndarray:
        return np.mean([s.closeness.relative_sigma for s in self.realizations], axis=0)


def _one_realization(
    model: ExchangeModel, x0: np.ndarray, cfg: SimulationConfig, index: int, stride: int
) -> RealizationStats:
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, index)))
    traj = run_trajectory(x0, model, cfg, rng=rng)
    series = indicator_series(traj.times[stride::stride], traj.states[stride::stride], model)
    r_gm = pearson(series.g, series.m)
    if cfg.conserve_income:
        r_gmu = None
        r_mmu = None
    else:
        r_gmu = pearson(series.g, series.mu)
        r_mmu = pearson(series.m, series.mu)
    return RealizationStats(
        index=index,
        r_gm=r_gm,
        r_gmu=r_gmu,
        r_mmu=r_mmu,
        closeness=closeness_diagnostics(traj, x0, stride=stride),
    )


def run_ensemble(
    model: ExchangeModel,
    x0: np.ndarray,
    cfg: SimulationConfig,
    realizations: int,
    spread: str = "sem",
    workers: int = 1,
    stride: int = 1,
) -> EnsembleReport:
    """Run ``realizations`` independent trajectories from the same initial
    distribution and aggregate their per-realization correlations.

    Individual trajectory failures abort only the affected realization; the
    ensemble errors out if fewer than 80% complete.
    """
    if realizations < 2:
        raise ValueError(f"need at least 2 realizations, got {realizations}")
    if spread not in ("sem", "std"):
        raise ValueError(f"spread must be 'sem' or 'std', got {spread!r}")
    if stride < 1 or stride > cfg.steps // 2:
        raise ValueError(f"stride must leave at least two samples, got {stride}")
    x0 = np.asarray(x0, dtype=np.float64)

    def job(i: int) -> RealizationStats | None:
        try:
            return _one_realization(model, x0, cfg, i, stride)
        except KinexError:
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(realizations)))
    else:
        results = [job(i) for i in range(realizations)]

    stats = [s for s in results if s is not None]
    failed = tuple(i for i, s in enumerate(results) if s is None)
    if len(stats) < 0.8 * realizations:
        raise EnsembleError(
            f"only {len(stats)} of {realizations} realizations completed"
        )
    mean_gm, se_gm = _mean_se([s.r_gm for s in stats], spread)
    if cfg.conserve_income:
        mean_gmu = se_gmu = mean_mmu = se_mmu = None
    else:
        mean_gmu, se_gmu = _mean_se([s.r_gmu for s in stats], spread)
        mean_mmu, se_mmu = _mean_se([s.r_mmu for s in stats], spread)
    return EnsembleReport(
        realizations=tuple(stats),
        failed=failed,
        mean_r_gm=mean_gm,
        se_r_gm=se_gm,
        mean_r_gmu=mean_gmu,
        se_r_gmu=se_gmu,
        mean_r_mmu=mean_mmu,
        se_r_mmu=se_mmu,
        config=cfg,
        model_n=model.n,
        model_delta_r=model.ladder.delta_r,
        model_s_unit=model.ladder.s_unit,
        x0=x0,
        spread=spread,
    )


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Per-income-cell equilibrium Gini and mean correlations, rows sorted
    by the initial total income."""

    mu0: np.ndarray
    g_eq: np.ndarray
    r_mg: np.ndarray
    se_mg: np.ndarray
    r_mug: np.ndarray
    se_mug: np.ndarray
    r_mmu: np.ndarray
    se_mmu: np.ndarray


def _cell_seed(base_seed: int, cell: int) -> int:
    return int(np.random.SeedSequence((base_seed, cell)).generate_state(1, np.uint64)[0])


def sweep_mu(
    model: ExchangeModel,
    cfg: SimulationConfig,
    mu_grid: np.ndarray,
    realizations: int = 50,
    workers: int = 1,
    equilibration_dt: float = 1.0,
) -> SweepResult:
    """For each total income in the grid: relax to the stationary state,
    take its Gini index, then run a population-conserving-only (income
    free to wander) ensemble from it.

    Each cell gets a seed derived from (cfg.seed, cell index), so the
    result for a given cell does not depend on the rest of the grid.
    """
    mu_grid = np.sort(np.asarray(mu_grid, dtype=np.float64))
    rows = []
    for cell, mu in enumerate(mu_grid):
        x_eq = equilibrium_for_income(mu, model.ladder, model.coefficients, dt=equilibration_dt)
        g_eq = gini(x_eq, model.ladder.r)
        cell_cfg = replace(cfg, conserve_income=False, seed=_cell_seed(cfg.seed, cell))
        report = run_ensemble(model, x_eq, cell_cfg, realizations, workers=workers)
        rows.append(
            (mu, g_eq, report.mean_r_gm, report.se_r_gm, report.mean_r_gmu,
             report.se_r_gmu, report.mean_r_mmu, report.se_r_mmu)
        )
    cols = list(zip(*rows))
    return SweepResult(
        mu0=np.asarray(cols[0]),
        g_eq=np.asarray(cols[1]),
        r_mg=np.asarray(cols[2]),
        se_mg=np.asarray(cols[3]),
        r_mug=np.asarray(cols[4]),
        se_mug=np.asarray(cols[5]),
        r_mmu=np.asarray(cols[6]),
        se_mmu=np.asarray(cols[7]),
    )


def sign_changes(values: np.ndarray) -> int:
    """Number of strict sign alternations along a sequence (zeros are
    carried over to the next nonzero value)."""
    values = np.asarray(values, dtype=np.float64)
    signs = np.sign(values)
    signs = signs[signs != 0]
    if signs.size < 2:
        return 0
    return int(np.sum(signs[1:] != signs[:-1]))


def zero_crossings(abscissa: np.ndarray, values: np.ndarray) -> list[float]:
    """Linearly interpolated abscissa positions where the values cross zero."""
    abscissa = np.asarray(abscissa, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    out = []
    for i in range(values.size - 1):
        v0, v1 = values[i], values[i + 1]
        if v0 == 0.0:
            continue
        if v0 * v1 < 0.0:
            frac = v0 / (v0 - v1)
            out.append(float(abscissa[i] + frac * (abscissa[i + 1] - abscissa[i])))
        elif v1 == 0.0 and i + 2 < values.size and v0 * values[i + 2] < 0.0:
            out.append(float(abscissa[i + 1]))
    return out
