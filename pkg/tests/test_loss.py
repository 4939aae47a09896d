"""
Pruebas del servicio de pérdida: predictores, pérdida y gradientes.
"""

import itertools

import numpy as np
import pytest

from spvar.errors import ArgumentError, ContractError
from spvar.models import CoefSet, ModelOrders, Omega, SpvarModel
from spvar.services.loss_service import loss_service
from spvar.services.model_service import model_service
from spvar.services.simulation_service import simulation_service
from tests.factories import random_model, random_omega

FD_STEP = 1e-6


def _instance(rng, orders, N=4, T=60):
    model = random_model(orders, N, rng, scale=0.2)
    Y = rng.standard_normal((T, N))
    return model, Y


# ----------------------------------------------------------------------
# Predictores
# ----------------------------------------------------------------------

def test_predictores_ejemplo_a_mano():
    Y = np.array([[1.0], [2.0], [3.0], [4.0]])
    lam = 0.4
    panel = loss_service.build_predictors(Y, ModelOrders(p=1, r=1), Omega(lambdas=(lam,)))
    np.testing.assert_allclose(panel.Z[:, 0], [0.0, 1.0, 2.0, 3.0])
    # t = 3: solo sobrevive el término h = 2
    assert panel.Z[2, 1] == pytest.approx(lam * 1.0)
    assert panel.Z[3, 1] == pytest.approx(lam * 2.0 + lam ** 2 * 1.0)


def test_predictores_recursion_igual_fuerza_bruta(rng):
    N, T = 4, 40
    Y = rng.standard_normal((T, N))
    for p, r, s in itertools.product(range(3), repeat=3):
        orders = ModelOrders(p=p, r=r, s=s)
        omega = random_omega(orders, rng)
        fast = loss_service.build_predictors(Y, orders, omega)
        slow = loss_service.build_predictors_bruteforce(Y, orders, omega)
        assert fast.Z.shape == (T, N * orders.d)
        np.testing.assert_allclose(fast.Z, slow.Z, rtol=0, atol=1e-10)


def test_predictores_panel_mas_corto_que_p(rng):
    Y = rng.standard_normal((2, 3))
    panel = loss_service.build_predictors(Y, ModelOrders(p=3, r=1), Omega(lambdas=(0.5,)))
    np.testing.assert_array_equal(panel.Z[:, 6:12], np.zeros((2, 6)))


def test_predictores_con_valores_previos(rng):
    orders = ModelOrders(p=1, r=1, s=1)
    omega = random_omega(orders, rng)
    Y = rng.standard_normal((50, 3))
    full = loss_service.build_predictors(Y, orders, omega, with_derivatives=True)
    trimmed = loss_service.build_predictors(Y, orders, omega, with_derivatives=True, presample=20)
    np.testing.assert_array_equal(trimmed.Z, full.Z[20:])
    np.testing.assert_array_equal(trimmed.d_lambda[0], full.d_lambda[0][20:])
    np.testing.assert_array_equal(trimmed.d_theta[0], full.d_theta[0][20:])
    with pytest.raises(ArgumentError):
        loss_service.build_predictors(Y, orders, omega, presample=50)


def test_predictores_omega_inconsistente(rng):
    with pytest.raises(ArgumentError):
        loss_service.build_predictors(rng.standard_normal((10, 2)), ModelOrders(p=1, r=1), Omega())


# ----------------------------------------------------------------------
# Pérdida
# ----------------------------------------------------------------------

def test_perdida_ejemplo_escalar():
    Y = np.array([[1.0], [1.0]])
    orders = ModelOrders(p=1)
    panel = loss_service.build_predictors(Y, orders, Omega())
    G = CoefSet(N=1, mats=[[[0.5]]])
    assert loss_service.loss_value(Y, panel, G) == pytest.approx(0.625)


def test_perdida_con_g_nula(rng):
    Y = rng.standard_normal((30, 3))
    orders = ModelOrders(p=1, r=1, s=1)
    panel = loss_service.build_predictors(Y, orders, random_omega(orders, rng))
    value = loss_service.loss_value(Y, panel, CoefSet.zeros(3, orders.d))
    assert value == pytest.approx(float(np.sum(Y ** 2)) / 30)


def test_perdida_descompone_por_filas(rng):
    model, Y = _instance(rng, ModelOrders(p=1, r=1, s=1))
    panel = loss_service.build_predictors(Y, model.orders, model.omega)
    rows = loss_service.row_losses(Y, panel, model.coefs)
    assert rows.shape == (4,)
    assert rows.sum() == pytest.approx(loss_service.loss_value(Y, panel, model.coefs))
    Gcat = model.coefs.concat()
    for i in range(4):
        single = loss_service.loss_value(Y[:, [i]], panel, Gcat[[i]])
        assert single == pytest.approx(rows[i])


def test_perdida_forma_de_g_invalida(rng):
    Y = rng.standard_normal((10, 2))
    panel = loss_service.build_predictors(Y, ModelOrders(p=1), Omega())
    with pytest.raises(ArgumentError):
        loss_service.loss_value(Y, panel, np.zeros((2, 4)))


def test_perdida_invariante_a_la_forma_canonica(rng):
    orders = ModelOrders(p=1, r=2, s=2)
    omega = Omega(lambdas=(-0.3, 0.6), etas=((0.5, 2.0), (0.4, 0.7)))
    model = SpvarModel(orders=orders, omega=omega, coefs=CoefSet(N=3, mats=0.2 * rng.standard_normal((7, 3, 3))))
    Y = rng.standard_normal((80, 3))
    canonical = model_service.canonicalize(model)
    assert canonical.omega.lambdas == (0.6, -0.3)
    values = []
    for candidate in (model, canonical):
        panel = loss_service.build_predictors(Y, candidate.orders, candidate.omega)
        values.append(loss_service.loss_value(Y, panel, candidate.coefs))
    assert values[1] == pytest.approx(values[0], rel=1e-12)
    np.testing.assert_allclose(loss_service.residuals(canonical, Y), loss_service.residuals(model, Y), atol=1e-12)


def test_perdida_suma_compensada_en_paneles_largos():
    # 1e16 absorbe cada 1 en una suma secuencial
    T = 20001
    Y = np.ones((T, 1))
    Y[0, 0] = 1e8
    panel = loss_service.build_predictors(Y, ModelOrders(), Omega())
    losses = loss_service.row_losses(Y, panel, np.zeros((1, 0)))
    assert losses[0] == (1e16 + 20000) / T
    assert loss_service.loss_value(Y, panel, np.zeros((1, 0))) == (1e16 + 20000) / T


def test_residuos_recuperan_innovaciones(rng):
    model = random_model(ModelOrders(p=1, r=1, s=1), 3, rng, scale=0.05)
    eps = rng.standard_normal((80, 3))
    panel = simulation_service.simulate_spvar(model, 80, burn_in=0, force=True, innovations=eps)
    np.testing.assert_allclose(loss_service.residuals(model, panel), eps, atol=1e-10)


# ----------------------------------------------------------------------
# Gradientes
# ----------------------------------------------------------------------

LAYOUTS = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (2, 1, 1), (0, 2, 1)]


def test_grad_g_diferencias_finitas(rng):
    for instance in range(20):
        orders = ModelOrders(**dict(zip("prs", LAYOUTS[instance % len(LAYOUTS)])))
        model, Y = _instance(rng, orders)
        panel = loss_service.build_predictors(Y, orders, model.omega)
        Gcat = model.coefs.concat()
        analytic = loss_service.grad_g(Y, panel, Gcat)
        numeric = np.zeros_like(Gcat)
        for idx in np.ndindex(*Gcat.shape):
            plus, minus = Gcat.copy(), Gcat.copy()
            plus[idx] += FD_STEP
            minus[idx] -= FD_STEP
            numeric[idx] = (
                loss_service.loss_value(Y, panel, plus) - loss_service.loss_value(Y, panel, minus)
            ) / (2 * FD_STEP)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)


def test_grad_omega_diferencias_finitas(rng):
    for instance in range(20):
        orders = ModelOrders(**dict(zip("prs", LAYOUTS[instance % len(LAYOUTS)])))
        if orders.r + orders.s == 0:
            continue
        model, Y = _instance(rng, orders)
        panel = loss_service.build_predictors(Y, orders, model.omega, with_derivatives=True)
        analytic = loss_service.grad_omega(Y, panel, model.coefs)
        vector = model.omega.as_vector()
        numeric = np.zeros_like(vector)
        for j in range(vector.size):
            values = []
            for sign in (1.0, -1.0):
                shifted = vector.copy()
                shifted[j] += sign * FD_STEP
                omega = Omega.from_vector(shifted, orders.r, orders.s)
                values.append(
                    loss_service.loss_value(Y, loss_service.build_predictors(Y, orders, omega), model.coefs)
                )
            numeric[j] = (values[0] - values[1]) / (2 * FD_STEP)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)


def test_grad_omega_sin_derivadas(small_model, rng):
    Y = rng.standard_normal((20, 3))
    panel = loss_service.build_predictors(Y, small_model.orders, small_model.omega)
    with pytest.raises(ContractError):
        loss_service.grad_omega(Y, panel, small_model.coefs)


def test_grad_omega_vacio_para_var(rng):
    Y = rng.standard_normal((20, 2))
    model = SpvarModel.zero(2, ModelOrders(p=2))
    panel = loss_service.build_predictors(Y, model.orders, model.omega, with_derivatives=True)
    assert loss_service.grad_omega(Y, panel, model.coefs).shape == (0,)


# ----------------------------------------------------------------------
# Constante de Lipschitz
# ----------------------------------------------------------------------

def test_lipschitz_coincide_con_svd(rng):
    Z = rng.standard_normal((60, 8))
    sigma = np.linalg.svd(Z, compute_uv=False)[0]
    estimate = loss_service.lipschitz_estimate(Z, iterations=500)
    assert estimate == pytest.approx(2 * sigma ** 2 / 60, rel=1e-6)


def test_lipschitz_matriz_nula():
    assert loss_service.lipschitz_estimate(np.zeros((10, 3))) == 0.0
    assert loss_service.lipschitz_estimate(np.zeros((10, 0))) == 0.0
