"""Conservation-constrained multiplicative noise.

Two projections turn raw bounded Gaussian draws into admissible
perturbations of the class fractions:

* :func:`project_population` keeps only the total population fixed; the
  perturbation of class i is proportional to x_i.
* :func:`project_income` keeps population *and* total income fixed.  The
  raw draw is first shrunk by 3/(4 * Omega), where Omega tracks the worst
  adjacent-class ratio, then corrected through a tridiagonal matrix A whose
  columns are built to cancel both conserved sums.  The combination
  guarantees |result_i| <= x_i, so one noise kick can never overshoot a
  class population.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PositivityError, SingularLadderError

__all__ = [
    "CorrectionMatrix",
    "draw_noise",
    "project_population",
    "correction_matrix",
    "omega",
    "project_income",
]


def draw_noise(rng: np.random.Generator, n: int, mode: str = "truncate") -> np.ndarray:
    """Draw n independent standard normals bounded to [-1, 1].

    ``truncate`` redraws out-of-range samples (rejection, acceptance ~68%),
    preserving a continuous density on [-1, 1]; ``clip`` instead clamps,
    piling mass at the endpoints.  Both satisfy the |xi_i| <= 1 requirement
    of the income-conserving projection; clip exists for sensitivity checks.
    """
    return _bounded_normal(rng, (int(n),), mode)


def _bounded_normal(rng: np.random.Generator, shape: tuple[int, ...], mode: str) -> np.ndarray:
    out = rng.standard_normal(shape)
    if mode == "clip":
        return np.clip(out, -1.0, 1.0)
    if mode != "truncate":
        raise ValueError(f"unknown noise mode {mode!r} (expected 'truncate' or 'clip')")
    flat = out.reshape(-1)
    bad = np.flatnonzero(np.abs(flat) > 1.0)
    while bad.size:
        flat[bad] = rng.standard_normal(bad.size)
        bad = bad[np.abs(flat[bad]) > 1.0]
    return out


def project_population(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Population-conserving variation: x_i xi_i - x_i sum_k x_k xi_k.

    Equivalent to applying the matrix with diagonal x_i (1 - x_i) and
    off-diagonal -x_i x_j to xi.  The output sums to zero for any input and
    each component is bounded by 2 x_i when |xi| <= 1.
    """
    x = np.asarray(x, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    return x * xi - x * float(x @ xi)


@dataclass(frozen=True, eq=False)
class CorrectionMatrix:
    """Tridiagonal correction A mapping shrunk noise into the doubly
    conserving subspace: result = eta + A @ eta.

    Column i of A is the least-squares solution (over its tridiagonal
    window) of the two affine constraints 1 + sum_j a[j, i] = 0 and
    r_i + sum_j a[j, i] r_j = 0.  ``counts``, ``win_r`` and ``win_r2`` are
    the per-column window size and window sums of r and r**2 feeding the
    closed-form entries.
    """

    a: np.ndarray
    counts: np.ndarray
    win_r: np.ndarray
    win_r2: np.ndarray

    def __post_init__(self) -> None:
        for name in ("a", "counts", "win_r", "win_r2"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.a.shape[0]


def correction_matrix(r: np.ndarray) -> CorrectionMatrix:
    """Build the tridiagonal correction matrix for an income vector r.

    a[j, i] = (N_i r_i r_j + T_i - R_i r_i - R_i r_j) / (R_i^2 - N_i T_i)
    for j in the window {i-1, i, i+1} clipped to [1, n], zero elsewhere,
    with N_i the window size and R_i, T_i the window sums of r and r^2.
    The denominator vanishes only if the window incomes are all equal,
    which a strictly increasing ladder rules out (checked defensively).
    """
    r = np.asarray(r, dtype=np.float64)
    n = r.shape[0]
    if n < 3:
        raise SingularLadderError(f"need at least 3 classes, got {n}")
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise SingularLadderError("income vector must be positive and strictly increasing")
    a = np.zeros((n, n), dtype=np.float64)
    counts = np.zeros(n)
    win_r = np.zeros(n)
    win_r2 = np.zeros(n)
    for i in range(n):
        lo, hi = max(0, i - 1), min(n - 1, i + 1)
        window = r[lo : hi + 1]
        n_i = float(window.size)
        r_i = float(window.sum())
        t_i = float((window**2).sum())
        denom = r_i * r_i - n_i * t_i
        if denom == 0.0:
            raise SingularLadderError(f"degenerate window around class {i + 1}")
        counts[i], win_r[i], win_r2[i] = n_i, r_i, t_i
        for j in range(lo, hi + 1):
            a[j, i] = (n_i * r[i] * r[j] + t_i - r_i * r[i] - r_i * r[j]) / denom
    return CorrectionMatrix(a=a, counts=counts, win_r=win_r, win_r2=win_r2)


def omega(x: np.ndarray) -> float:
    """Worst adjacent-class population ratio, floored at 1.

    Omega = max(1, max_i x_i / x_{i-1}, max_i x_i / x_{i+1}).  Requires all
    components strictly positive; a zero component means the caller must
    run the deterministic recovery branch instead of adding noise.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0):
        raise PositivityError("omega undefined: some class fraction is not positive")
    ratios = x[1:] / x[:-1]
    return float(max(1.0, ratios.max(), (1.0 / ratios).max()))


def project_income(x: np.ndarray, eta0: np.ndarray, corr: CorrectionMatrix) -> np.ndarray:
    """Population-and-income-conserving variation built from a bounded draw.

    Shrinks the draw to eta_i = (3/4) x_i eta0_i / Omega(x) and applies the
    correction, returning eta + A @ eta.  Both conserved sums of the result
    vanish and |result_i| <= x_i componentwise.
    """
    x = np.asarray(x, dtype=np.float64)
    eta0 = np.asarray(eta0, dtype=np.float64)
    eta = (0.75 / omega(x)) * x * eta0
    return eta + corr.a @ eta
