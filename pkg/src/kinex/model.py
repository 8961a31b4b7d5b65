"""Core exchange model: income ladder, payment probabilities, transition
coefficients, deterministic drift and stationary states.

The population is split into ``n`` income classes with average incomes
``r_j = j * delta_r``.  Pairwise monetary exchanges of one money unit
``s_unit`` move individuals to adjacent classes; the probability that the
payer in an (h, k) encounter is the h-class individual is ``p[h, k]``.
Aggregating over all encounters gives a transition tensor ``c[i, h, k]``
(probability that an h-class individual lands in class i after meeting a
k-class one) and a quadratic drift field on the population simplex.  The
drift conserves both the population sum and the total income exactly, so
any consistent integrator preserves them to round-off.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, ModelParameterError
from .noise import CorrectionMatrix, correction_matrix

__all__ = [
    "IncomeLadder",
    "PaymentMatrix",
    "CoefficientTensor",
    "ExchangeModel",
    "build_payment_matrix",
    "build_coefficients",
    "drift",
    "integrate_deterministic",
    "equilibrium_for_income",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class IncomeLadder:
    """Linear ladder of class incomes, r_j = j * delta_r for j = 1..n.

    ``s_unit`` is the money unit exchanged per encounter and must be small
    compared to the class spacing ``delta_r``; a ratio above 0.2 still
    works but triggers a warning because the transition probabilities stop
    being small corrections.
    """

    n: int
    delta_r: float
    s_unit: float
    r: np.ndarray

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 3:
            raise ModelParameterError(f"need at least 3 income classes, got n={self.n}")
        if not self.delta_r > 0:
            raise ModelParameterError(f"class spacing must be positive, got {self.delta_r}")
        if not self.s_unit > 0:
            raise ModelParameterError(f"money unit must be positive, got {self.s_unit}")
        if not self.s_unit < self.delta_r:
            raise ModelParameterError(
                f"money unit s_unit={self.s_unit} must be smaller than the "
                f"class spacing delta_r={self.delta_r}"
            )
        if self.s_unit / self.delta_r > 0.2:
            warnings.warn(
                f"s_unit/delta_r = {self.s_unit / self.delta_r:.3f} > 0.2; the "
                "one-unit-per-exchange approximation is getting coarse",
                stacklevel=2,
            )
        expected = np.arange(1, self.n + 1, dtype=np.float64) * self.delta_r
        got = np.asarray(self.r, dtype=np.float64)
        if got.shape != (self.n,) or not np.allclose(got, expected, rtol=0, atol=1e-12):
            raise ModelParameterError("income vector must satisfy r_j = j * delta_r")
        object.__setattr__(self, "r", _frozen(expected))

    @classmethod
    def linear(cls, n: int, delta_r: float = 10.0, s_unit: float = 1.0) -> "IncomeLadder":
        r = np.arange(1, n + 1, dtype=np.float64) * delta_r
        return cls(n=n, delta_r=float(delta_r), s_unit=float(s_unit), r=r)


@dataclass(frozen=True, eq=False)
class PaymentMatrix:
    """Payment probabilities p[h, k]: chance that the h-class individual pays
    in an (h, k) encounter.  Stored 0-based; :meth:`at` takes 1-based class
    labels and returns 0 outside 1..n, so formulas indexed up to n+1 or
    down to 0 can use it directly.
    """

    p: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _frozen(self.p))

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def at(self, h: int, k: int) -> float:
        if 1 <= h <= self.n and 1 <= k <= self.n:
            return float(self.p[h - 1, k - 1])
        return 0.0


@dataclass(frozen=True, eq=False)
class CoefficientTensor:
    """Transition probabilities c[i, h, k] (0-based): an h-class individual
    moves to class i after an encounter with a k-class one.  For every (h, k)
    the entries sum to 1 over i.

    ``loss_matrix[i, k] = sum_h c[h, i, k]`` is cached because the drift's
    loss term only needs these column sums.
    """

    c: np.ndarray
    loss_matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _frozen(self.c))
        object.__setattr__(self, "loss_matrix", _frozen(self.loss_matrix))

    @property
    def n(self) -> int:
        return self.c.shape[0]


def build_payment_matrix(n: int) -> PaymentMatrix:
    """Build the n x n payment-probability matrix.

    The poorest class never pays (it cannot move down) and nobody pays a
    richest-class individual (it cannot move up), so row 1 and column n are
    identically zero.  Away from the boundary classes the payer probability
    grows with the poorer of the two classes: p = min(h, k) / (4n) for
    h != k and h / (2n) on the diagonal, with dedicated terms coupling the
    top class to every other payee and to the bottom class.
    """
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise ModelParameterError(f"need at least 3 income classes, got n={n}")
    p = np.zeros((n, n), dtype=np.float64)
    for h in range(1, n + 1):
        for k in range(1, n + 1):
            v = 0.0
            if h != k and k != 1 and h != 1 and h != n and k != n:
                v += min(h, k) / (4.0 * n)
            if h == k and k != 1 and k != n:
                v += h / (2.0 * n)
            if h == n and k != n and k != 1:
                v += k / (2.0 * n)
            if k == 1 and h != 1 and h != n:
                v += 1.0 / (2.0 * n)
            if h == n and k == 1:
                v += 1.0 / (2.0 * n)
            p[h - 1, k - 1] = v
    return PaymentMatrix(p=p)


def build_coefficients(ladder: IncomeLadder, payments: PaymentMatrix) -> CoefficientTensor:
    """Assemble the transition tensor forced by exact income conservation.

    An h-class individual can only stay put or hop to an adjacent class,
    exchanging one ``s_unit``; the hop probabilities are proportional to
    ``s_unit / delta_r`` times the relevant payment probabilities.  Raises
    :class:`ModelParameterError` if any entry falls outside [0, 1], which
    signals an ``s_unit`` too large for the ladder spacing.
    """
    n = ladder.n
    if payments.n != n:
        raise ModelParameterError(
            f"payment matrix built for n={payments.n}, ladder has n={n}"
        )
    ratio = ladder.s_unit / ladder.delta_r
    c = np.zeros((n, n, n), dtype=np.float64)
    for i in range(1, n + 1):
        for k in range(1, n + 1):
            stay = 1.0
            if i != n and k != 1:
                stay -= ratio * payments.at(k, i)
            if i != 1 and k != n:
                stay -= ratio * payments.at(i, k)
            c[i - 1, i - 1, k - 1] = stay
            # h = i + 1 pays one unit and drops to class i
            if i + 1 <= n and k != n:
                c[i - 1, i, k - 1] = ratio * payments.at(i + 1, k)
            # h = i - 1 receives one unit and climbs to class i
            if i - 1 >= 1 and k != 1:
                c[i - 1, i - 2, k - 1] = ratio * payments.at(k, i - 1)
    if c.min() < 0.0 or c.max() > 1.0:
        raise ModelParameterError(
            "transition probabilities left [0, 1]; s_unit is too large "
            f"relative to delta_r (ratio {ratio})"
        )
    loss = c.sum(axis=0)
    return CoefficientTensor(c=c, loss_matrix=loss)


def drift(x: np.ndarray, tensor: CoefficientTensor) -> np.ndarray:
    """Deterministic rate of change of the class fractions.

    gain_i = sum_{h,k} c[i,h,k] x_h x_k, loss_i = x_i sum_{h,k} c[h,i,k] x_k.
    Both the plain sum and the income-weighted sum of the result vanish
    identically, for any x (not only on the simplex).
    """
    x = np.asarray(x, dtype=np.float64)
    gain = (tensor.c @ x) @ x
    loss = x * (tensor.loss_matrix @ x)
    return gain - loss


def _rk4_step(x: np.ndarray, tensor: CoefficientTensor, dt: float) -> np.ndarray:
    k1 = drift(x, tensor)
    k2 = drift(x + 0.5 * dt * k1, tensor)
    k3 = drift(x + 0.5 * dt * k2, tensor)
    k4 = drift(x + dt * k3, tensor)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_deterministic(
    x0: np.ndarray,
    tensor: CoefficientTensor,
    dt: float = 0.1,
    max_steps: int = 2_000_000,
    tol: float = 1e-10,
) -> tuple[np.ndarray, bool]:
    """Relax the noise-free system with classical fixed-step RK4.

    Stops when the max-norm of the drift falls below ``tol`` and returns
    ``(state, converged)``; hitting ``max_steps`` first is reported through
    the flag, not an exception.
    """
    if not dt > 0:
        raise ModelParameterError(f"dt must be positive, got {dt}")
    if not tol > 0:
        raise ModelParameterError(f"tol must be positive, got {tol}")
    x = np.array(x0, dtype=np.float64)
    for _ in range(max_steps):
        if np.max(np.abs(drift(x, tensor))) < tol:
            return x, True
        x = _rk4_step(x, tensor, dt)
    return x, np.max(np.abs(drift(x, tensor))) < tol


def equilibrium_for_income(
    mu: float,
    ladder: IncomeLadder,
    tensor: CoefficientTensor,
    blend: float = 0.5,
    dt: float = 0.1,
    max_steps: int = 2_000_000,
    tol: float = 1e-10,
) -> np.ndarray:
    """Stationary distribution with prescribed total income ``mu``.

    Starts from a strictly positive blend (1 - lam) * uniform + lam * v,
    where v puts mass only on the poorest and richest classes and the mix
    fraction is solved so the blend's total income equals ``mu`` exactly.
    ``blend`` is the preferred lam; it is raised automatically when v would
    need a negative component (low or high ``mu``).  The blend then relaxes
    under the income-conserving deterministic dynamics.
    """
    r1, rn = ladder.r[0], ladder.r[-1]
    if not (r1 < mu < rn):
        raise DomainError(
            f"total income must lie strictly between {r1} and {rn}, got {mu}"
        )
    mu_uniform = float(ladder.r.mean())
    # v-feasibility: the two-class income (mu - (1-lam)*mu_uniform)/lam must
    # lie inside [r1, rn], which bounds lam from below.
    lam_min = 0.0
    if mu < mu_uniform:
        lam_min = max(lam_min, (mu_uniform - mu) / (mu_uniform - r1))
    elif mu > mu_uniform:
        lam_min = max(lam_min, (mu - mu_uniform) / (rn - mu_uniform))
    lam = blend if blend > lam_min else 0.5 * (lam_min + 1.0)
    mu_v = (mu - (1.0 - lam) * mu_uniform) / lam
    a = (rn - mu_v) / (rn - r1)
    x0 = np.full(ladder.n, (1.0 - lam) / ladder.n)
    x0[0] += lam * a
    x0[-1] += lam * (1.0 - a)
    x, converged = integrate_deterministic(x0, tensor, dt=dt, max_steps=max_steps, tol=tol)
    if not converged:
        raise ConvergenceError(
            f"relaxation for mu={mu} did not reach drift < {tol} in {max_steps} steps"
        )
    return x


@dataclass(frozen=True, eq=False)
class ExchangeModel:
    """Immutable bundle of everything derived from (n, delta_r, s_unit).

    Safe to share across concurrent workers: all members are frozen after
    construction and every operation on them is pure.
    """

    ladder: IncomeLadder
    payments: PaymentMatrix
    coefficients: CoefficientTensor
    correction: CorrectionMatrix

    @classmethod
    def build(cls, n: int = 10, delta_r: float = 10.0, s_unit: float = 1.0) -> "ExchangeModel":
        ladder = IncomeLadder.linear(n, delta_r=delta_r, s_unit=s_unit)
        payments = build_payment_matrix(n)
        tensor = build_coefficients(ladder, payments)
        return cls(
            ladder=ladder,
            payments=payments,
            coefficients=tensor,
            correction=correction_matrix(ladder.r),
        )

    @property
    def n(self) -> int:
        return self.ladder.n
