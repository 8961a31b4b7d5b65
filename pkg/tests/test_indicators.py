"""Gini, Lorenz curve, mobility and total income."""

import numpy as np
import pytest

from kinex import (
    DegeneratePopulationError,
    DomainError,
    gini,
    indicator_series,
    lorenz_curve,
    mobility,
    total_income,
)
from conftest import random_simplex


def lorenz_area_gini(x, r):
    """Trapezoid-rule area ratio, the geometric oracle for the Gini index."""
    pts = lorenz_curve(x, r)
    f, l = pts[:, 0], pts[:, 1]
    under = float(np.sum((f[1:] - f[:-1]) * (l[1:] + l[:-1])) / 2.0)
    return (0.5 - under) / 0.5


def mobility_oracle(x, payments, ladder):
    n = ladder.n
    acc = 0.0
    for i in range(2, n):  # interior classes, 1-based
        for k in range(1, n + 1):
            acc += (
                ladder.s_unit
                / (ladder.r[i] - ladder.r[i - 1])
                * payments.at(k, i)
                * x[k - 1]
                * x[i - 1]
            )
    return acc / (1.0 - x[0] - x[n - 1])


R10 = 10.0 * np.arange(1, 11)


class TestTotalIncome:
    def test_point_mass(self):
        x = np.zeros(10)
        x[0] = 1.0
        assert total_income(x, R10) == 10.0

    def test_uniform(self):
        assert total_income(np.full(10, 0.1), R10) == pytest.approx(55.0, abs=1e-12)

    def test_equilibrium_income(self, eq27):
        assert total_income(eq27, R10) == pytest.approx(27.0, abs=1e-9)

    def test_within_ladder_range(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            mu = total_income(random_simplex(rng, 10), R10)
            assert 10.0 <= mu <= 100.0


class TestGini:
    def test_single_class_is_equal(self):
        x = np.zeros(10)
        x[4] = 1.0
        assert gini(x, R10) == 0.0

    def test_two_class_hand_value(self):
        x = np.zeros(10)
        x[0] = x[-1] = 0.5
        assert gini(x, R10) == pytest.approx(45.0 / 110.0, abs=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            x = random_simplex(rng, 10)
            assert gini(x, R10) == pytest.approx(gini(x, 3.7 * R10), abs=1e-12)

    def test_lorenz_oracle_equivalence(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            x = random_simplex(rng, 10)
            assert gini(x, R10) == pytest.approx(lorenz_area_gini(x, R10), abs=1e-12)

    def test_uniform_closed_form(self):
        x = np.full(10, 0.1)
        expected = sum(abs(ri - rj) for ri in R10 for rj in R10) / (2.0 * 100 * 55.0)
        assert gini(x, R10) == pytest.approx(expected, abs=1e-12)

    def test_zero_income_rejected(self):
        with pytest.raises(DomainError):
            gini(np.zeros(10), R10)


class TestLorenzCurve:
    def test_endpoints_and_monotonicity(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            pts = lorenz_curve(random_simplex(rng, 10), R10)
            assert pts[0] == pytest.approx([0.0, 0.0], abs=0.0)
            assert pts[-1] == pytest.approx([1.0, 1.0], abs=1e-12)
            assert (np.diff(pts[:, 0]) >= -1e-15).all()
            assert (np.diff(pts[:, 1]) >= -1e-15).all()

    def test_convexity(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            x = random_simplex(rng, 10) + 1e-9
            x /= x.sum()
            pts = lorenz_curve(x, R10)
            slopes = np.diff(pts[:, 1]) / np.diff(pts[:, 0])
            assert (np.diff(slopes) >= -1e-9).all()

    def test_single_class_degenerate(self):
        x = np.zeros(10)
        x[4] = 1.0
        pts = lorenz_curve(x, R10)
        assert lorenz_area_gini(x, R10) == pytest.approx(0.0, abs=1e-12)
        assert pts.shape == (11, 2)


class TestMobility:
    def test_boundary_population_rejected(self, model):
        x = np.zeros(10)
        x[0] = 1.0
        with pytest.raises(DegeneratePopulationError):
            mobility(x, model.payments, model.ladder)
        x = np.zeros(10)
        x[0] = x[-1] = 0.5
        with pytest.raises(DegeneratePopulationError):
            mobility(x, model.payments, model.ladder)

    def test_equilibrium_magnitude(self, model, eq27):
        m = mobility(eq27, model.payments, model.ladder)
        assert 1e-3 < m < 1e-2

    def test_matches_double_sum_oracle(self, model):
        rng = np.random.default_rng(5)
        for _ in range(200):
            x = random_simplex(rng, 10)
            assert mobility(x, model.payments, model.ladder) == pytest.approx(
                mobility_oracle(x, model.payments, model.ladder), abs=1e-14
            )

    def test_nonnegative(self, model):
        rng = np.random.default_rng(6)
        for _ in range(200):
            assert mobility(random_simplex(rng, 10), model.payments, model.ladder) >= 0.0


class TestIndicatorSeries:
    def test_matches_scalar_functions(self, model, eq27):
        rng = np.random.default_rng(7)
        states = np.vstack([eq27] + [random_simplex(rng, 10) for _ in range(5)])
        times = np.arange(6.0)
        series = indicator_series(times, states, model)
        for k in range(6):
            assert series.g[k] == pytest.approx(gini(states[k], R10), abs=1e-14)
            assert series.m[k] == pytest.approx(
                mobility(states[k], model.payments, model.ladder), abs=1e-14
            )
            assert series.mu[k] == pytest.approx(total_income(states[k], R10), abs=1e-12)

    def test_degenerate_sample_rejected(self, model):
        states = np.zeros((1, 10))
        states[0, 0] = 1.0
        with pytest.raises(DegeneratePopulationError):
            indicator_series(np.zeros(1), states, model)
