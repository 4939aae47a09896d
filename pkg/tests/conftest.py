"""
Configuración de pytest: generadores con semilla, modelos y paneles pequeños.
"""

import numpy as np
import pytest

from spvar.models import CoefSet, ModelOrders, Omega, SeriesPanel, SpvarModel
from spvar.schemas.fit import FitConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def orders_110():
    return ModelOrders(p=1, r=1, s=0)


@pytest.fixture
def small_model(rng, orders_110):
    """(p,r,s) = (1,1,0), N = 3, λ₁ = −0.5."""
    mats = 0.15 * rng.standard_normal((2, 3, 3))
    return SpvarModel(orders=orders_110, omega=Omega(lambdas=(-0.5,)), coefs=CoefSet(N=3, mats=mats))


@pytest.fixture
def small_panel(rng):
    return SeriesPanel.from_array(rng.standard_normal((60, 4)))


@pytest.fixture
def fast_config():
    """Configuración del solver para pruebas rápidas."""
    return FitConfig(max_iter=300, tol=1e-7, max_starts=3, threads=1, seed=0)
