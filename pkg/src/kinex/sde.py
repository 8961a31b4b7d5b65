"""Euler-Maruyama integration of the noisy exchange dynamics.

One step reads x' = x + drift(x) dt + eta sqrt(gamma dt), with eta the
population-conserving or the population-and-income-conserving projection
of a fresh bounded Gaussian draw.  A control loop watches for components
at or below ``positivity_eps``: while any is, the system evolves without
noise (the kinetic drift pushes emptied classes back up), and noisy
stepping resumes once the whole vector is strictly positive again.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelParameterError, PositivityError, RecoveryFailureError
from .kernels import run_kernel
from .model import ExchangeModel, drift
from .noise import _bounded_normal, draw_noise, project_income, project_population

__all__ = ["SimulationConfig", "Trajectory", "step_stochastic", "run_trajectory"]

MAX_RECOVERY_STEPS = 100_000


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs of one stochastic run.

    ``gamma`` is the noise amplitude (0 is allowed as a testing escape
    hatch that reduces stepping to plain Euler).  ``conserve_income``
    selects the projection: True enforces both conserved sums, False only
    the population sum.  ``positivity_eps`` is the threshold below which a
    component counts as vanished; it must stay below 1/n (checked against
    the model at run time).

    The default step size puts a 5000-step run in the partial
    drift-tracking regime that the reference correlation tables live in.
    The correlations are insensitive to smaller steps in the
    income-conserving mode but not in the free-income mode, where the
    drift/noise balance sets where the correlation signs flip; runs meant
    to probe the near-equilibrium closeness bands instead want dt small
    enough that the accumulated noise stays tiny (around 1e-6 at the
    default noise amplitude).
    """

    gamma: float = 0.001
    dt: float = 0.1
    steps: int = 5000
    conserve_income: bool = True
    positivity_eps: float = 1e-12
    seed: int = 0
    noise_mode: str = "truncate"

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ModelParameterError(f"gamma must be nonnegative, got {self.gamma}")
        if not self.dt > 0:
            raise ModelParameterError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ModelParameterError(f"steps must be at least 1, got {self.steps}")
        if not 0 <= self.positivity_eps < 1:
            raise ModelParameterError(
                f"positivity_eps must lie in [0, 1), got {self.positivity_eps}"
            )
        if self.noise_mode not in ("truncate", "clip"):
            raise ModelParameterError(f"unknown noise mode {self.noise_mode!r}")

    @property
    def mode(self) -> str:
        return "population-and-income-conserving" if self.conserve_income else "population-conserving"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled path: states[k] is the distribution at times[k] (state 0 is
    the initial condition).  ``recovery_events`` counts deterministic
    interludes, ``retry_events`` the dt/10 substep fallbacks."""

    times: np.ndarray
    states: np.ndarray
    recovery_events: int
    retry_events: int

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1


def step_stochastic(
    x: np.ndarray,
    model: ExchangeModel,
    cfg: SimulationConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """One noisy step from x.  In income-conserving mode every component
    must exceed ``positivity_eps``; violations raise :class:`PositivityError`
    so the caller can route to the deterministic recovery branch."""
    x = np.asarray(x, dtype=np.float64)
    if cfg.conserve_income and np.any(x <= cfg.positivity_eps):
        raise PositivityError(
            "income-conserving step requires all class fractions above "
            f"positivity_eps={cfg.positivity_eps}"
        )
    xi = draw_noise(rng, model.n, cfg.noise_mode)
    if cfg.conserve_income:
        eta = project_income(x, xi, model.correction)
    else:
        eta = project_population(x, xi)
    return x + cfg.dt * drift(x, model.coefficients) + np.sqrt(cfg.gamma * cfg.dt) * eta


def run_trajectory(
    x0: np.ndarray,
    model: ExchangeModel,
    cfg: SimulationConfig,
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Integrate ``cfg.steps`` steps from x0, sampling every step.

    The noise stream is pre-generated from ``rng`` (or from a generator
    seeded with ``cfg.seed``), so identical (seed, config) pairs give
    bit-identical trajectories.  Steps taken inside a deterministic
    recovery interlude consume no noise.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    n = model.n
    if x0.shape != (n,):
        raise ModelParameterError(f"x0 must have shape ({n},), got {x0.shape}")
    if np.any(x0 < 0.0) or abs(float(x0.sum()) - 1.0) > 1e-9:
        raise ModelParameterError("x0 must be a population distribution summing to 1")
    if not cfg.positivity_eps < 1.0 / n:
        raise ModelParameterError(
            f"positivity_eps={cfg.positivity_eps} must be below 1/n = {1.0 / n}"
        )
    if cfg.conserve_income:
        mu0 = float(x0 @ model.ladder.r)
        r1, rn = model.ladder.r[0], model.ladder.r[-1]
        if not (r1 < mu0 < rn):
            raise DomainError(
                f"income-conserving runs need total income strictly between "
                f"{r1} and {rn}, got {mu0}"
            )
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    noise = _bounded_normal(rng, (cfg.steps, n), cfg.noise_mode)
    states = np.empty((cfg.steps + 1, n), dtype=np.float64)
    _, recoveries, retries, status = run_kernel(
        model.coefficients.c,
        model.coefficients.loss_matrix,
        model.correction.a,
        x0,
        noise,
        cfg.dt,
        float(np.sqrt(cfg.gamma * cfg.dt)),
        cfg.conserve_income,
        cfg.positivity_eps,
        MAX_RECOVERY_STEPS,
        states,
    )
    if status == 1:
        raise RecoveryFailureError(
            f"positivity not restored within {MAX_RECOVERY_STEPS} deterministic steps"
        )
    if status == 2:
        raise ModelParameterError(
            f"dt={cfg.dt} drives class fractions negative even with dt/10 substeps"
        )
    times = np.arange(cfg.steps + 1, dtype=np.float64) * cfg.dt
    return Trajectory(times=times, states=states, recovery_events=recoveries, retry_events=retries)
