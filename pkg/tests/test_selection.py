"""
Pruebas del servicio de selección (BIC de órdenes y trayectoria de λ_g).
"""

import math

import numpy as np
import pytest

from spvar.errors import ArgumentError
from spvar.models import CoefSet, GInit, ModelOrders, Omega, SeriesPanel, SpvarModel
from spvar.schemas.fit import FitConfig
from spvar.services.selection_service import selection_service
from spvar.services.simulation_service import simulation_service
from spvar.services.solver_service import solver_service


@pytest.fixture
def var1_panel():
    model = SpvarModel(orders=ModelOrders(p=1), omega=Omega(), coefs=CoefSet(N=3, mats=(0.5 * np.eye(3))[None]))
    return simulation_service.simulate_spvar(model, 200, burn_in=50, rng=np.random.default_rng(31))


def test_bic_score_formula():
    orders = ModelOrders(p=1, r=1, s=0)
    expected = math.log(2.0) + 1.0 * 2 * (math.log(10) / 100) * math.log(100)
    assert selection_service.bic_score(2.0, orders, 10, 100, tau=1.0, q=0.0) == pytest.approx(expected)
    weak = math.log(2.0) + 1.0 * 2 * (math.log(10) / 100) ** 0.5 * math.log(100)
    assert selection_service.bic_score(2.0, orders, 10, 100, tau=1.0, q=1.0) == pytest.approx(weak)


def test_bic_score_usa_p_minimo_uno():
    no_ar = selection_service.bic_score(1.0, ModelOrders(r=1), 5, 50, tau=1.0, q=0.0)
    assert no_ar == pytest.approx((math.log(5) / 50) * math.log(50))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"loss": 0.0},
        {"T": 1},
        {"q": 1.5},
        {"tau": -1.0},
    ],
)
def test_bic_score_errores(kwargs):
    params = {"loss": 1.0, "orders": ModelOrders(p=1), "N": 3, "T": 50, "tau": 0.1, "q": 0.0}
    params.update(kwargs)
    with pytest.raises(ArgumentError):
        selection_service.bic_score(**params)


def test_sparsity_score():
    n = 3 * 100
    expected = math.log(0.5) + 4 * math.log(math.log(n)) * math.log(18) / n
    assert selection_service.sparsity_score(0.5, 4, 3, 2, 100) == pytest.approx(expected)
    assert math.isfinite(selection_service.sparsity_score(0.0, 0, 3, 1, 100))


def test_sparsity_score_factor_minimo_uno():
    # N·T = 8: log log 8 < 1
    assert selection_service.sparsity_score(1.0, 2, 2, 1, 4) == pytest.approx(2 * math.log(4) / 8)


def test_sparsity_score_admite_soporte_moderado():
    # N=10, T=240, d=2: diez coeficientes que reducen la pérdida un 6 % ganan a g = 0
    empty = selection_service.sparsity_score(0.48, 0, 10, 2, 240)
    sparse = selection_service.sparsity_score(0.48 * 0.94, 10, 10, 2, 240)
    assert sparse < empty
    per_nonzero = selection_service.sparsity_score(1.0, 1, 10, 2, 240)
    assert per_nonzero == pytest.approx(math.log(math.log(2400)) * math.log(200) / 2400)
    assert per_nonzero < 0.005


def test_lambda_max_anula_la_solucion(var1_panel, fast_config):
    orders = ModelOrders(p=1)
    config = fast_config.model_copy(update={"g_init": GInit.ZERO})
    top = selection_service.lambda_max(var1_panel, orders, config)
    assert top > 0
    grid = [top * 1.01, top * 0.2]
    path = selection_service.lambda_path(var1_panel, orders, config, grid)
    assert [point.lambda_g for point in path] == grid
    assert path[0].nnz == 0
    assert path[1].nnz > 0


def test_default_grid(var1_panel, fast_config):
    orders = ModelOrders(p=1)
    grid = selection_service.default_grid(var1_panel, orders, fast_config, size=5)
    top = selection_service.lambda_max(var1_panel, orders, fast_config)
    assert len(grid) == 5
    assert grid[0] == pytest.approx(top)
    assert grid[-1] == pytest.approx(1e-3 * top)
    assert all(a > b for a, b in zip(grid, grid[1:]))


def test_default_grid_datos_nulos(fast_config):
    panel = SeriesPanel.from_array(np.zeros((20, 2)))
    assert selection_service.default_grid(panel, ModelOrders(p=1), fast_config) == [0.0]


def test_lambda_path_ordena_descendente(var1_panel, fast_config):
    path = selection_service.lambda_path(var1_panel, ModelOrders(p=1, r=1), fast_config, [0.01, 0.1, 0.05])
    assert [point.lambda_g for point in path] == [0.1, 0.05, 0.01]


def test_lambda_path_errores(var1_panel, fast_config):
    with pytest.raises(ArgumentError):
        selection_service.lambda_path(var1_panel, ModelOrders(p=1), fast_config, [])
    with pytest.raises(ArgumentError):
        selection_service.lambda_path(var1_panel, ModelOrders(p=1), fast_config, [0.1, -0.1])


def test_select_lambda_g_pertenece_a_la_rejilla(var1_panel, fast_config):
    grid = [0.2, 0.05, 0.01, 0.001]
    chosen = selection_service.select_lambda_g(var1_panel, ModelOrders(p=1), grid, fast_config)
    assert chosen in grid
    path = selection_service.lambda_path(var1_panel, ModelOrders(p=1), fast_config, grid)
    best = min(path, key=lambda point: (point.score, -point.lambda_g))
    assert chosen == best.lambda_g


def test_select_orders_elige_var1(var1_panel, fast_config):
    table = selection_service.select_orders(var1_panel, (1, 0, 0), fast_config, lambda_g=0.01)
    assert len(table.rows) == 2
    assert table.chosen_orders == ModelOrders(p=1)
    assert all(row.bic is not None and row.lambda_g_used == 0.01 for row in table.rows)
    zero = table.rows[0]
    assert zero.orders == ModelOrders()
    assert zero.nnz == 0


def test_select_orders_rejilla_completa(var1_panel, fast_config):
    table = selection_service.select_orders(var1_panel, (1, 1, 0), fast_config, lambda_g=0.02, tau=0.1, q=0.5)
    assert [row.orders.as_tuple() for row in table.rows] == [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0)]
    assert table.tau == 0.1 and table.q == 0.5
    chosen = table.rows[table.chosen]
    assert chosen.bic == min(row.bic for row in table.rows if row.converged)


def test_select_orders_maximos_invalidos(var1_panel, fast_config):
    with pytest.raises(ArgumentError):
        selection_service.select_orders(var1_panel, (1, -1, 0), fast_config)


@pytest.mark.slow
def test_lambda_seleccionado_no_anula_dgp1():
    spec = simulation_service.dgp1(N=10, seed=0)
    truth, panel = simulation_service.simulate_dgp(spec, 240, rng=np.random.default_rng(7))
    config = FitConfig(max_starts=4, threads=1, seed=0)
    path = selection_service.lambda_path(panel, spec.orders, config)
    best = min(path, key=lambda point: (point.score, -point.lambda_g))
    assert best.lambda_g < path[0].lambda_g
    assert best.nnz > 0
    fit = solver_service.fit_je(panel, spec.orders, config.model_copy(update={"lambda_g": best.lambda_g}))
    target = truth.coefs.concat()
    assert np.linalg.norm(fit.model.coefs.concat() - target) < np.linalg.norm(target)
