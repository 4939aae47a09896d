"""
Pruebas del servicio de simulación.
"""

import math

import numpy as np
import pytest

from spvar.errors import ArgumentError, NonStationaryError
from spvar.models import CoefSet, ModelOrders, Omega, SparsityMode, SpvarModel
from spvar.schemas.simulation import DgpSpec
from spvar.services.model_service import model_service
from spvar.services.simulation_service import simulation_service


def _var1(G1: np.ndarray) -> SpvarModel:
    N = G1.shape[0]
    return SpvarModel(orders=ModelOrders(p=1), omega=Omega(), coefs=CoefSet(N=N, mats=G1[None]))


# ----------------------------------------------------------------------
# Coeficientes
# ----------------------------------------------------------------------

def test_coeficientes_por_fila():
    spec = simulation_service.dgp1(N=10)
    coefs = simulation_service.gen_sparse_coefs(spec, np.random.default_rng(3))
    assert coefs.mats.shape == (2, 10, 10)
    for G in coefs.mats:
        assert np.count_nonzero(G) == 30
        np.testing.assert_array_equal(np.count_nonzero(G, axis=1), np.full(10, 3))


def test_coeficientes_modo_total():
    spec = simulation_service.selection_dgp(ModelOrders(p=1, r=0, s=1), 0.55, N=12)
    assert spec.sparsity_mode == SparsityMode.TOTAL
    coefs = simulation_service.gen_sparse_coefs(spec, np.random.default_rng(4))
    for G in coefs.mats:
        assert np.count_nonzero(G) == 36


def test_coeficientes_sin_no_nulos():
    spec = simulation_service.dgp1(N=5).model_copy(update={"nonzeros_per_row": 0})
    coefs = simulation_service.gen_sparse_coefs(spec, np.random.default_rng(0))
    assert not np.any(coefs.mats)


def test_coeficientes_deterministas():
    spec = simulation_service.dgp2(N=8)
    first = simulation_service.gen_sparse_coefs(spec, np.random.default_rng(7))
    second = simulation_service.gen_sparse_coefs(spec, np.random.default_rng(7))
    np.testing.assert_array_equal(first.mats, second.mats)


def test_coeficientes_dispersion_imposible():
    spec = simulation_service.dgp1(N=2)
    with pytest.raises(ArgumentError):
        simulation_service.gen_sparse_coefs(spec, np.random.default_rng(0))


def test_reescalado_var1():
    coefs = CoefSet(N=2, mats=(0.4 * np.eye(2))[None])
    outcome = simulation_service.rescale_for_stationarity(coefs, ModelOrders(p=1), Omega(), 0.8)
    assert outcome.factor == pytest.approx(2.0, abs=1e-8)
    assert outcome.criterion == pytest.approx(0.8, abs=1e-8)
    assert model_service.spectral_radius(outcome.coefs.mats[0]) == pytest.approx(0.8, abs=1e-8)


def test_reescalado_alcanza_objetivo():
    spec = simulation_service.dgp1(N=10)
    coefs = simulation_service.gen_sparse_coefs(spec, np.random.default_rng(11))
    criterion = simulation_service.stationarity_criterion(coefs.mats, 1, 0.6)
    assert criterion == pytest.approx(0.8, abs=1e-8)
    model = SpvarModel(orders=spec.orders, omega=spec.omega, coefs=coefs)
    ok, _ = model_service.stationarity_sufficient(model)
    assert ok


def test_reescalado_degenerado():
    coefs = CoefSet.zeros(3, 2)
    outcome = simulation_service.rescale_for_stationarity(
        coefs, ModelOrders(p=1, r=1), Omega(lambdas=(0.5,)), 0.8
    )
    assert outcome.degenerate
    assert not np.any(outcome.coefs.mats)


def test_reescalado_objetivo_invalido():
    coefs = CoefSet(N=1, mats=np.ones((1, 1, 1)))
    with pytest.raises(ArgumentError):
        simulation_service.rescale_for_stationarity(coefs, ModelOrders(p=1), Omega(), 1.0)


# ----------------------------------------------------------------------
# Trayectorias SPVAR(∞)
# ----------------------------------------------------------------------

def test_modelo_nulo_es_ruido():
    model = SpvarModel.zero(3, ModelOrders(p=1, r=1))
    eps = np.random.default_rng(5).standard_normal((110, 3))
    panel = simulation_service.simulate_spvar(model, 100, burn_in=10, innovations=eps)
    np.testing.assert_array_equal(panel.data, eps[10:])


def test_modelo_nulo_sin_autocorrelacion():
    model = SpvarModel.zero(2, ModelOrders(p=1))
    T = 2000
    panel = simulation_service.simulate_spvar(model, T, rng=np.random.default_rng(8))
    for column in panel.data.T:
        x = column - column.mean()
        rho1 = float(x[1:] @ x[:-1] / (x @ x))
        assert abs(rho1) < 4 / math.sqrt(T)


def test_var1_coincide_con_recursion_directa():
    rng = np.random.default_rng(9)
    G1 = 0.5 * np.eye(3) + 0.1 * rng.standard_normal((3, 3))
    eps = rng.standard_normal((80, 3))
    panel = simulation_service.simulate_spvar(_var1(G1), 70, burn_in=10, innovations=eps)
    y = np.zeros((80, 3))
    for i in range(80):
        previous = y[i - 1] if i > 0 else np.zeros(3)
        y[i] = G1 @ previous + eps[i]
    np.testing.assert_allclose(panel.data, y[10:], rtol=0, atol=1e-14)


def test_simulacion_rechaza_no_estacionario():
    model = _var1(1.1 * np.eye(2))
    with pytest.raises(NonStationaryError):
        simulation_service.simulate_spvar(model, 10, rng=np.random.default_rng(0))
    panel = simulation_service.simulate_spvar(model, 10, burn_in=0, rng=np.random.default_rng(0), force=True)
    assert panel.T == 10


def test_simulacion_requiere_ruido():
    with pytest.raises(ArgumentError):
        simulation_service.simulate_spvar(_var1(0.2 * np.eye(2)), 10)
    with pytest.raises(ArgumentError):
        simulation_service.simulate_spvar(_var1(0.2 * np.eye(2)), 10, burn_in=0, innovations=np.zeros((5, 2)))


def test_simulacion_determinista():
    spec = simulation_service.dgp1(N=6, seed=2)
    _, first = simulation_service.simulate_dgp(spec, 50)
    _, second = simulation_service.simulate_dgp(spec, 50)
    np.testing.assert_array_equal(first.data, second.data)


def test_dgp1_varianza_estable():
    spec = simulation_service.dgp1(N=10, seed=1)
    _, panel = simulation_service.simulate_dgp(spec, 4000)
    first, second = panel.data[:2000].var(axis=0), panel.data[2000:].var(axis=0)
    ratio = first / second
    assert np.all((ratio > 0.5) & (ratio < 2.0))


def test_dgp_presets():
    dgp1 = simulation_service.dgp1()
    assert dgp1.orders == ModelOrders(p=1, r=1, s=0)
    assert dgp1.omega.lambdas == (-0.6,)
    assert dgp1.nonzeros_per_row == 3
    dgp2 = simulation_service.dgp2()
    assert dgp2.orders == ModelOrders(p=1, r=0, s=1)
    assert dgp2.omega.etas[0] == pytest.approx((0.6, math.pi / 4))
    selection = simulation_service.selection_dgp(ModelOrders(p=1, r=1, s=0), 0.55, N=20)
    assert selection.omega.lambdas == (-0.55,)
    assert selection.nonzeros_per_matrix == 60
    assert selection.name == "order110"


def test_dgp_spec_invalido():
    with pytest.raises(ValueError):
        DgpSpec(N=3, orders=ModelOrders(p=1, r=1), omega=Omega())
    with pytest.raises(ValueError):
        DgpSpec(N=3, orders=ModelOrders(p=1), omega=Omega(), stationarity_target=1.2)


# ----------------------------------------------------------------------
# VARMA(1,1)
# ----------------------------------------------------------------------

def test_varma11_ar_coef_casos():
    rng = np.random.default_rng(1)
    Phi = 0.5 * np.eye(3)
    Theta = 0.2 * rng.standard_normal((3, 3))
    np.testing.assert_array_equal(simulation_service.varma11_ar_coef(Phi, Theta, 1), Phi - Theta)
    zero = np.zeros((3, 3))
    np.testing.assert_array_equal(simulation_service.varma11_ar_coef(Phi, zero, 1), Phi)
    np.testing.assert_array_equal(simulation_service.varma11_ar_coef(Phi, zero, 4), zero)
    np.testing.assert_array_equal(simulation_service.varma11_ar_coef(Phi, Phi, 3), zero)


def test_random_orthogonal():
    Q = simulation_service.random_orthogonal(4, np.random.default_rng(2))
    np.testing.assert_allclose(Q.T @ Q, np.eye(4), atol=1e-12)


def test_varma11_autovalores_complejos():
    Phi = 0.5 * np.eye(4)
    omega = Omega(etas=((0.6, math.pi / 4),))
    _, Theta = simulation_service.varma11_from_jordan(Phi, omega, rng=np.random.default_rng(3))
    eigenvalues = np.linalg.eigvals(Theta)
    target = 0.6 * np.exp(1j * math.pi / 4)
    for value in (target, np.conj(target)):
        assert np.min(np.abs(eigenvalues - value)) < 1e-10


def test_varma11_configuracion_del_experimento():
    Phi = 0.5 * np.eye(10)
    model, Theta = simulation_service.varma11_from_jordan(
        Phi, Omega(lambdas=(-0.7,)), rng=np.random.default_rng(4)
    )
    assert model.orders == ModelOrders(p=1, r=1, s=0)
    np.testing.assert_allclose(model.coefs.mats[0], Phi - Theta, atol=1e-15)
    assert model_service.spectral_radius(Theta) == pytest.approx(0.7, abs=1e-10)


def test_varma11_errores():
    Phi = 0.5 * np.eye(2)
    with pytest.raises(ArgumentError):
        simulation_service.varma11_from_jordan(Phi, Omega(lambdas=(0.3, 0.4, 0.5)), rng=np.random.default_rng(0))
    with pytest.raises(ArgumentError):
        simulation_service.varma11_from_jordan(Phi, Omega(lambdas=(1.2,)), rng=np.random.default_rng(0))
    with pytest.raises(ArgumentError):
        simulation_service.varma11_from_jordan(Phi, Omega(lambdas=(0.3,)))


def test_varma11_sin_ma_coincide_con_var1():
    rng = np.random.default_rng(6)
    Phi = 0.4 * np.eye(3) + 0.05 * rng.standard_normal((3, 3))
    eps = rng.standard_normal((60, 3))
    varma = simulation_service.simulate_varma11(Phi, np.zeros((3, 3)), 50, burn_in=10, innovations=eps)
    var = simulation_service.simulate_spvar(_var1(Phi), 50, burn_in=10, innovations=eps)
    np.testing.assert_allclose(varma.data, var.data, rtol=0, atol=1e-14)


@pytest.mark.parametrize(
    "omega",
    [Omega(lambdas=(-0.7,)), Omega(lambdas=(0.6, -0.3)), Omega(etas=((0.6, math.pi / 4),))],
)
def test_varma11_coincide_con_spvar_equivalente(omega):
    rng = np.random.default_rng(8)
    Phi = 0.5 * np.eye(5)
    model, Theta = simulation_service.varma11_from_jordan(Phi, omega, rng=rng)
    eps = 0.2 * rng.standard_normal((300, 5))
    varma = simulation_service.simulate_varma11(Phi, Theta, 200, burn_in=100, innovations=eps)
    spvar = simulation_service.simulate_spvar(model, 200, burn_in=100, force=True, innovations=eps)
    np.testing.assert_allclose(spvar.data, varma.data, rtol=0, atol=1e-6)


def test_varma11_ruido_blanco():
    eps = np.random.default_rng(7).standard_normal((30, 2))
    zero = np.zeros((2, 2))
    panel = simulation_service.simulate_varma11(zero, zero, 30, burn_in=0, innovations=eps)
    np.testing.assert_array_equal(panel.data, eps)


def test_varma11_no_estacionario():
    with pytest.raises(ArgumentError):
        simulation_service.simulate_varma11(1.1 * np.eye(2), np.zeros((2, 2)), 10, rng=np.random.default_rng(0))
