import json
import math

import numpy as np
import numpy.testing as npt
import pytest

from causalnet.controllers.training_controller import NuisanceKind, TrainConfig, train_nuisance
from causalnet.models.network import CnnSpec, MlpSpec
from causalnet.models.reports import EstimateReport, EstimatorSummary, MonteCarloReport
from causalnet.utils.errors import ConfigurationError, DataError, ReportWriteError
from causalnet.utils.numeric import Rng
from causalnet.utils.save_manager import MC_CSV_COLUMNS, SaveManager


@pytest.fixture
def manager():
    return SaveManager()


@pytest.fixture
def estimate_report():
    return EstimateReport(estimand="ACET", tau_hat=1.0, variance=1.0, se=0.1, alpha=0.05,
                          ci_low=0.8040036015459947, ci_high=1.1959963984540053, n=100, n1=40, n0=60,
                          method="DRcnn", notes=["p̂ aparado em 3 observações"])


@pytest.fixture
def mc_report():
    rows = [EstimatorSummary.from_estimates("naive", [1.0, 3.0], [0.5, 1.5], [True, False], 1.0, 0),
            EstimatorSummary.from_estimates("DRcnn", [2.0], [0.3], [True], 1.5, 1)]
    return MonteCarloReport(setting=1, estimand="ACET", n=200, replications=2, alpha=0.05, true_effect=1.0,
                            seed=7, estimators=rows, config={"estimators": ["naive", "DRcnn"]})


class TestReports:

    def test_estimate_json_round_trip(self, manager, estimate_report, tmp_path):
        path = manager.save_report(estimate_report, tmp_path / "r.json")
        loaded = manager.load_report(path)
        assert isinstance(loaded, EstimateReport)
        assert loaded == estimate_report

    def test_monte_carlo_json_round_trip(self, manager, mc_report, tmp_path):
        loaded = manager.load_report(manager.save_report(mc_report, tmp_path / "mc.json"))
        assert isinstance(loaded, MonteCarloReport)
        assert loaded.summary("naive") == mc_report.summary("naive")
        assert math.isnan(loaded.summary("DRcnn").mc_sd)
        assert loaded.config == mc_report.config

    def test_nan_serialized_as_null(self, manager, mc_report, tmp_path):
        path = manager.save_report(mc_report, tmp_path / "mc.json")
        payload = json.loads(path.read_text(encoding='utf-8'))
        assert payload["estimators"][1]["mc_sd"] is None
        assert payload["report_type"] == "monte_carlo"
        assert "integrity_hash" in payload

    def test_identical_reports_identical_bytes(self, manager, mc_report, tmp_path):
        a = manager.save_report(mc_report, tmp_path / "a.json")
        b = manager.save_report(mc_report, tmp_path / "b.json")
        assert a.read_bytes() == b.read_bytes()

    def test_csv_header(self, manager, mc_report, tmp_path):
        path = manager.save_report(mc_report, tmp_path / "mc.csv")
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0] == ",".join(MC_CSV_COLUMNS) == "estimator,bias,coverage,mc_sd,est_sd,mse"
        assert [line.split(",")[0] for line in lines[1:]] == ["naive", "DRcnn"]

    def test_estimate_csv(self, manager, estimate_report):
        header, row = manager.report_csv(estimate_report).splitlines()
        assert header.startswith("estimand,method,tau_hat,se")
        assert row.startswith("ACET,DRcnn,1.0,0.1")

    def test_explicit_format_overrides_extension(self, manager, mc_report, tmp_path):
        path = manager.save_report(mc_report, tmp_path / "mc.out", fmt="csv")
        assert path.read_text(encoding='utf-8').startswith("estimator,")

    def test_unknown_format(self, manager, mc_report, tmp_path):
        with pytest.raises(ConfigurationError):
            manager.save_report(mc_report, tmp_path / "mc.xml")

    def test_tampered_report(self, manager, estimate_report, tmp_path):
        path = manager.save_report(estimate_report, tmp_path / "r.json")
        payload = json.loads(path.read_text(encoding='utf-8'))
        payload["tau_hat"] = 2.0
        path.write_text(json.dumps(payload), encoding='utf-8')
        with pytest.raises(DataError):
            manager.load_report(path)

    def test_incomplete_report(self, manager, estimate_report, tmp_path):
        payload = manager.report_payload(estimate_report)
        del payload["integrity_hash"], payload["tau_hat"]
        payload["integrity_hash"] = manager._compute_hash(payload)
        path = tmp_path / "r.json"
        path.write_text(json.dumps(payload), encoding='utf-8')
        with pytest.raises(DataError, match="tau_hat"):
            manager.load_report(path)

    def test_unknown_report_type(self, manager, estimate_report, tmp_path):
        payload = manager.report_payload(estimate_report)
        del payload["integrity_hash"]
        payload["report_type"] = "tabela"
        payload["integrity_hash"] = manager._compute_hash(payload)
        path = tmp_path / "r.json"
        path.write_text(json.dumps(payload), encoding='utf-8')
        with pytest.raises(DataError):
            manager.load_report(path)

    def test_missing_report(self, manager, tmp_path):
        with pytest.raises(DataError):
            manager.load_report(tmp_path / "none.json")

    def test_unwritable_path_leaves_nothing(self, manager, estimate_report, tmp_path):
        target = tmp_path / "missing_dir" / "r.json"
        with pytest.raises(ReportWriteError) as info:
            manager.save_report(estimate_report, target)
        assert info.value.path == str(target)
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []

    def test_failed_overwrite_keeps_previous_file(self, manager, estimate_report, tmp_path, monkeypatch):
        path = manager.save_report(estimate_report, tmp_path / "r.json")
        before = path.read_bytes()

        def failing_replace(src, dst):
            raise OSError("disco cheio")

        monkeypatch.setattr("causalnet.utils.save_manager.os.replace", failing_replace)
        with pytest.raises(ReportWriteError):
            manager.save_report(estimate_report, path)
        assert path.read_bytes() == before
        assert [p.name for p in tmp_path.iterdir()] == ["r.json"]


class TestModelCheckpoint:

    @pytest.fixture
    def regression_data(self, small_dataset):
        return small_dataset

    @pytest.mark.parametrize("spec", [MlpSpec(input_dim=4, widths=(6, 3)),
                                      CnnSpec(d=4, S=2, L=2, E=2)])
    def test_outcome_round_trip(self, manager, regression_data, spec, tmp_path):
        model = train_nuisance(regression_data, spec, TrainConfig(epochs=3, batch_size=16), Rng(2))
        loaded = manager.load_model(manager.save_model(model, tmp_path / "m.json"))
        assert loaded.network.params.keys() == model.network.params.keys()
        for name, value in model.network.params.items():
            assert loaded.network.params[name].shape == value.shape
            npt.assert_array_equal(loaded.network.params[name], value)
        assert loaded.loss_history == model.loss_history
        npt.assert_array_equal(loaded.predict(regression_data.x), model.predict(regression_data.x))

    def test_propensity_round_trip(self, manager, regression_data, tmp_path):
        model = train_nuisance(regression_data, MlpSpec(input_dim=4, widths=(4, 2)),
                               TrainConfig(epochs=2, epsilon=0.05), Rng(3), kind=NuisanceKind.PROPENSITY)
        loaded = manager.load_model(manager.save_model(model, tmp_path / "p.json"))
        assert loaded.kind == NuisanceKind.PROPENSITY
        assert math.isinf(loaded.m_prime) and loaded.epsilon == 0.05
        npt.assert_array_equal(loaded.predict(regression_data.x), model.predict(regression_data.x))

    def test_tampered_checkpoint(self, manager, regression_data, tmp_path):
        model = train_nuisance(regression_data, MlpSpec(input_dim=4, widths=(4, 2)), TrainConfig(epochs=1), Rng(4))
        path = manager.save_model(model, tmp_path / "m.json")
        payload = json.loads(path.read_text(encoding='utf-8'))
        payload["epsilon"] = (0.2).hex()
        path.write_text(json.dumps(payload), encoding='utf-8')
        with pytest.raises(DataError):
            manager.load_model(path)

    def test_hex_encoding(self, manager, regression_data, tmp_path):
        model = train_nuisance(regression_data, MlpSpec(input_dim=4, widths=(4, 2)), TrainConfig(epochs=1), Rng(4))
        payload = json.loads(manager.save_model(model, tmp_path / "m.json").read_text(encoding='utf-8'))
        first = payload["params"]["output.weight"]["values"][0]
        assert float.fromhex(first) == np.asarray(model.network.params["output.weight"]).reshape(-1)[0]
