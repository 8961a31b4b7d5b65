import numpy as np
import pytest

from kinex import ExchangeModel, equilibrium_for_income


@pytest.fixture(scope="session")
def model():
    return ExchangeModel.build(10, 10.0, 1.0)


@pytest.fixture(scope="session")
def equilibria(model):
    """Stationary distributions for the total incomes used throughout."""
    return {
        mu: equilibrium_for_income(mu, model.ladder, model.coefficients, dt=1.0)
        for mu in (22.0, 24.5, 27.0, 29.5, 32.0)
    }


@pytest.fixture(scope="session")
def eq27(equilibria):
    return equilibria[27.0]


def random_simplex(rng, n):
    return rng.dirichlet(np.ones(n))
