"""
Pruebas del servicio de diagnósticos.
"""

import numpy as np
import pytest

from spvar.errors import ArgumentError
from spvar.models import CoefSet, EdgeKind, ModelOrders, Omega, SpvarModel
from spvar.services.diagnostics_service import diagnostics_service
from spvar.services.model_service import model_service
from spvar.services.simulation_service import simulation_service


@pytest.fixture
def sparse_model():
    """N = 3, (p,r,s) = (1,1,0): 1→0 solo corto, 2→0 solo largo, 0→1 en ambos."""
    mats = np.zeros((2, 3, 3))
    mats[0, 0, 1] = 0.3
    mats[1, 0, 2] = -0.4
    mats[0, 1, 0] = 0.2
    mats[1, 1, 0] = 0.1
    mats[0, 2, 2] = 0.5
    return SpvarModel(orders=ModelOrders(p=1, r=1), omega=Omega(lambdas=(0.5,)), coefs=CoefSet(N=3, mats=mats))


def test_red_de_granger_clases(sparse_model):
    network = diagnostics_service.granger_network(sparse_model)
    edges = {(e.source, e.target): e for e in network.edges}
    assert set(edges) == {(1, 0), (2, 0), (0, 1)}
    assert edges[(1, 0)].kind == EdgeKind.SHORT_ONLY
    assert edges[(2, 0)].kind == EdgeKind.LONG_ONLY
    assert edges[(0, 1)].kind == EdgeKind.BOTH
    assert edges[(0, 1)].support == [1, 2]
    assert edges[(2, 0)].magnitude == pytest.approx(0.4)


def test_red_de_granger_sin_autoaristas(sparse_model):
    network = diagnostics_service.granger_network(sparse_model)
    assert all(edge.source != edge.target for edge in network.edges)


def test_red_de_granger_tolerancia(sparse_model):
    network = diagnostics_service.granger_network(sparse_model, zero_tol=0.25)
    assert {(e.source, e.target) for e in network.edges} == {(1, 0), (2, 0)}
    assert network.threshold == 0.25
    with pytest.raises(ArgumentError):
        diagnostics_service.granger_network(sparse_model, zero_tol=-1.0)


def test_red_de_granger_invariante_a_la_forma_canonica(rng):
    orders = ModelOrders(p=1, r=2, s=1)
    mats = np.where(rng.uniform(size=(5, 4, 4)) < 0.3, rng.uniform(-0.5, 0.5, size=(5, 4, 4)), 0.0)
    model = SpvarModel(
        orders=orders, omega=Omega(lambdas=(-0.4, 0.7), etas=((0.5, 1.0),)), coefs=CoefSet(N=4, mats=mats)
    )
    canonical = model_service.canonicalize(model)
    assert canonical.omega.lambdas == (0.7, -0.4)

    def summary(network):
        return {(e.source, e.target): (e.kind, e.magnitude, len(e.support)) for e in network.edges}

    assert summary(diagnostics_service.granger_network(canonical)) == summary(
        diagnostics_service.granger_network(model)
    )


def test_red_de_granger_modelo_nulo():
    network = diagnostics_service.granger_network(SpvarModel.zero(4, ModelOrders(p=1, r=1)))
    assert network.edges == []


def test_impulse_responses(sparse_model):
    psi = diagnostics_service.impulse_responses(sparse_model, 5)
    assert psi.shape == (5, 3, 3)
    np.testing.assert_allclose(psi, model_service.vma_coeffs(sparse_model, 5))


def test_threshold_covariance():
    cov = np.array([[1.0, 0.05, -0.3], [0.05, 2.0, 0.0], [-0.3, 0.0, 0.01]])
    out = diagnostics_service.threshold_covariance(cov, 0.1)
    expected = np.array([[1.0, 0.0, -0.3], [0.0, 2.0, 0.0], [-0.3, 0.0, 0.01]])
    np.testing.assert_array_equal(out, expected)
    np.testing.assert_array_equal(diagnostics_service.threshold_covariance(cov, 0.0), cov)
    with pytest.raises(ArgumentError):
        diagnostics_service.threshold_covariance(cov, -0.1)


def test_regla_practica_lambda_eps():
    cov = np.diag([1.0, 4.0])
    assert diagnostics_service.lambda_eps_rule_of_thumb(cov, 2, 100) == pytest.approx(
        2 * np.sqrt(np.log(2) / 100) * 4.0
    )
    assert diagnostics_service.lambda_eps_rule_of_thumb(np.eye(1), 1, 100) == 0.0


def test_sigma_eps_recupera_covarianza(sparse_model):
    rng = np.random.default_rng(17)
    eps = rng.standard_normal((2000, 3))
    panel = simulation_service.simulate_spvar(sparse_model, 2000, burn_in=0, innovations=eps)
    sigma = diagnostics_service.sigma_eps_estimate(sparse_model, panel, lambda_eps=0.0)
    np.testing.assert_allclose(sigma, eps.T @ eps / 2000, atol=1e-10)
    thresholded = diagnostics_service.sigma_eps_estimate(sparse_model, panel)
    np.testing.assert_allclose(np.diag(thresholded), np.diag(sigma))
    np.testing.assert_allclose(thresholded, thresholded.T)
    kept = thresholded != 0
    np.testing.assert_array_equal(thresholded[kept], sigma[kept])


def test_to_dot(sparse_model):
    network = diagnostics_service.granger_network(sparse_model)
    dot = diagnostics_service.to_dot(network, names=["a", "b", "c"])
    assert dot.startswith("digraph granger {")
    assert '"b" -> "a" [kind=short, style=dashed' in dot
    assert '"c" -> "a" [kind=long, style=dotted' in dot
    assert '"a" -> "b" [kind=both, style=solid' in dot
    assert dot.rstrip().endswith("}")


def test_to_dot_nombres_por_defecto():
    dot = diagnostics_service.to_dot(diagnostics_service.granger_network(SpvarModel.zero(2, ModelOrders(p=1))))
    assert '"y1";' in dot and '"y2";' in dot
    assert "->" not in dot
