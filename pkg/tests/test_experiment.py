"""
Pruebas de las réplicas Monte Carlo reducidas.
"""

import numpy as np
import pandas as pd
import pytest

from spvar.errors import FitError
from spvar.models import Estimator, ExperimentName, ForecastEstimator, ModelOrders
from spvar.schemas.experiment import ExperimentConfig
from spvar.schemas.fit import FitConfig
from spvar.services.experiment_service import experiment_service


def _config(name, fast_config, **kwargs):
    values = {"name": name, "replicates": 1, "N": 4, "lambda_g": 0.02, "fit": fast_config, "threads": 1}
    values.update(kwargs)
    return ExperimentConfig(**values)


def test_config_valores_por_defecto():
    config = ExperimentConfig(name=ExperimentName.ERROR_SCALING)
    assert config.resolved_sizes == [60, 120, 240]
    assert config.resolved_N == 10
    assert config.columns[:3] == ["dgp", "N", "T"]
    assert ExperimentConfig(name=ExperimentName.BIC_CONSISTENCY).resolved_N == 20
    assert config.estimator == Estimator.JE
    comparison = ExperimentConfig(name=ExperimentName.JE_RE_COMPARISON)
    assert comparison.resolved_sizes == [50, 100, 150, 300, 500]
    assert comparison.resolved_N == 20
    assert comparison.nonzeros_per_row == 2 and comparison.comparison_lambda == 0.6
    init = ExperimentConfig(name=ExperimentName.INIT_SENSITIVITY)
    assert init.columns[4:6] == ["estimator", "init"]


def test_config_invalida():
    with pytest.raises(ValueError):
        ExperimentConfig(name=ExperimentName.ERROR_SCALING, dgp="dgp3")
    with pytest.raises(ValueError):
        ExperimentConfig(name=ExperimentName.ERROR_SCALING, sizes=[1])


def test_unidades_con_semilla_por_indice():
    config = ExperimentConfig(name=ExperimentName.ERROR_SCALING, replicates=2, sizes=[30, 40])
    assert experiment_service._units(config) == [(0, 30, 0), (1, 30, 1), (2, 40, 0), (3, 40, 1)]


def test_error_scaling_una_fila(fast_config):
    config = _config(ExperimentName.ERROR_SCALING, fast_config, sizes=[60])
    frame = experiment_service.run(config)
    assert list(frame.columns) == config.columns
    assert len(frame) == 1
    row = frame.iloc[0]
    assert row["dgp"] == "dgp1" and row["T"] == 60 and row["N"] == 4
    assert row["estimator"] == "je"
    assert row["err_a"] >= 0 and row["err_g"] >= 0 and row["err_omega"] >= 0


def test_error_scaling_independiente_de_hilos(fast_config):
    serial = experiment_service.run(_config(ExperimentName.ERROR_SCALING, fast_config, sizes=[40], replicates=2))
    parallel = experiment_service.run(
        _config(ExperimentName.ERROR_SCALING, fast_config, sizes=[40], replicates=2, threads=2)
    )
    pd.testing.assert_frame_equal(serial, parallel)


def test_error_scaling_con_re(fast_config):
    config = _config(ExperimentName.ERROR_SCALING, fast_config, sizes=[60], estimator=Estimator.RE)
    frame = experiment_service.run(config)
    row = frame.iloc[0]
    assert row["estimator"] == "re"
    assert row["err_g"] >= 0 and row["err_omega"] >= 0


def test_comparacion_je_re(fast_config):
    config = _config(ExperimentName.JE_RE_COMPARISON, fast_config, sizes=[60])
    frame = experiment_service.run(config)
    assert list(frame.columns) == config.columns
    assert frame["estimator"].tolist() == ["je", "re"]
    assert frame["dgp"].tolist() == ["row2", "row2"]
    assert frame["lambda_g"].nunique() == 1
    assert (frame[["err_a", "err_g", "err_omega"]] >= 0).all().all()
    summary = experiment_service.summarize(frame, config)
    assert list(summary.columns) == ["T", "estimator", "err_a", "err_g", "err_omega"]
    assert len(summary) == 2


def test_sensibilidad_a_la_inicializacion(fast_config):
    config = _config(ExperimentName.INIT_SENSITIVITY, fast_config, sizes=[50], N=3, presample=30)
    frame = experiment_service.run(config)
    assert list(frame.columns) == config.columns
    assert frame["estimator"].tolist() == ["je", "je", "re", "re"]
    assert frame["init"].tolist() == ["zero", "actual", "zero", "actual"]
    assert (frame["T"] == 50).all()
    assert frame["err_a"].notna().all()
    summary = experiment_service.summarize(frame, config)
    assert list(summary.columns) == ["T", "estimator", "init", "err_a", "err_g", "err_omega"]
    assert len(summary) == 4


def test_bic_consistency(fast_config):
    config = _config(
        ExperimentName.BIC_CONSISTENCY, fast_config, sizes=[80], N=5, max_orders=(1, 1, 0),
        true_orders=ModelOrders(p=1, r=1),
    )
    frame = experiment_service.run(config)
    assert len(frame) == 1
    row = frame.iloc[0]
    assert row["dgp"] == "order110"
    assert row["correct"] == int((row["selected_p"], row["selected_r"], row["selected_s"]) == (1, 1, 0))
    summary = experiment_service.summarize(frame, config)
    assert list(summary.columns) == ["T", "proportion"]


def test_varma_forecast(fast_config):
    config = _config(ExperimentName.VARMA_FORECAST, fast_config, sizes=[60])
    frame = experiment_service.run(config)
    assert list(frame["estimator"]) == [e.value for e in ForecastEstimator]
    assert (frame["l2_error"] >= 0).all()
    summary = experiment_service.summarize(frame, config)
    assert len(summary) == 4


def test_replica_fallida(fast_config):
    config = _config(ExperimentName.VARMA_FORECAST, fast_config, sizes=[30], ols_lag=100)
    with pytest.raises(FitError) as info:
        experiment_service.run(config)
    assert "T=30" in info.value.detail


def test_run_experiment_escribe_csv(tmp_path, fast_config):
    config = _config(ExperimentName.ERROR_SCALING, fast_config, sizes=[40], dgp="dgp2")
    path = experiment_service.run_experiment(config, tmp_path)
    assert path == tmp_path / "error-scaling.csv"
    frame = pd.read_csv(path)
    assert list(frame.columns) == config.columns
    assert frame["dgp"].tolist() == ["dgp2"]
    summary = experiment_service.summarize(frame, config)
    assert list(summary.columns) == ["T", "err_a", "err_g", "err_omega"]


# ----------------------------------------------------------------------
# Réplicas completas (lentas)
# ----------------------------------------------------------------------

@pytest.mark.slow
def test_error_de_estimacion_decrece_con_t():
    config = ExperimentConfig(name=ExperimentName.ERROR_SCALING, lambda_g=0.01, threads=4)
    summary = experiment_service.summarize(experiment_service.run(config), config)
    medians = summary.set_index("T")["err_a"]
    assert medians[60] > medians[120] > medians[240]
    assert medians[60] / medians[240] >= 1.5


@pytest.mark.slow
def test_bic_elige_los_ordenes_verdaderos():
    config = ExperimentConfig(
        name=ExperimentName.BIC_CONSISTENCY, tau=0.05, q=0.0, max_orders=(3, 3, 3),
        fit=FitConfig(max_starts=8, threads=1), threads=4,
    )
    assert config.resolved_N == 20 and config.resolved_sizes == [1000]
    frame = experiment_service.run(config)
    assert len(frame) == 20
    assert frame["correct"].mean() >= 0.7


@pytest.mark.slow
def test_je_y_re_errores_comparables():
    medians = {}
    for estimator in (Estimator.JE, Estimator.RE):
        config = ExperimentConfig(
            name=ExperimentName.ERROR_SCALING, sizes=[300], lambda_g=0.01, estimator=estimator, threads=4,
        )
        medians[estimator] = experiment_service.run(config)["err_g"].median()
    ratio = medians[Estimator.RE] / medians[Estimator.JE]
    assert 1 / 1.5 <= ratio <= 1.5


@pytest.mark.slow
def test_pronostico_varma_je_no_peor_que_var_lasso():
    config = ExperimentConfig(name=ExperimentName.VARMA_FORECAST, replicates=10, threads=4)
    frame = experiment_service.run(config)
    errors = {
        name: group.sort_values("replicate")["l2_error"].to_numpy()
        for name, group in frame.groupby("estimator")
    }
    je, lasso = errors[ForecastEstimator.SPVAR_JE.value], errors[ForecastEstimator.VAR_LASSO.value]
    assert not np.allclose(je, lasso)
    assert np.median(je) <= np.median(lasso)
