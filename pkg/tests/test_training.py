import math

import numpy as np
import numpy.testing as npt
import pytest

from causalnet.controllers import training_controller
from causalnet.controllers.training_controller import (Adam, InputScaler, LossKind, NuisanceKind, NuisanceTrainer,
                                                       TrainConfig, default_outcome_m_prime, loss_value,
                                                       train_nuisance)
from causalnet.models.dataset import Dataset
from causalnet.models.network import CnnSpec, CnnVariant, MlpSpec, OutputKind
from causalnet.utils.errors import ConfigurationError, DataError, DivergenceError, DomainError
from causalnet.utils.event_bus import TRAINING_FINISHED, EventBus
from causalnet.utils.numeric import Rng

FAST = TrainConfig(epochs=30, batch_size=32, learning_rate=5e-3, patience=30)


@pytest.fixture
def regression_data():
    rng = Rng(1)
    x = rng.normal(0.0, 1.0, size=(200, 4))
    t = rng.bernoulli(0.5, size=200)
    y = 1.5 * x[:, 0] - x[:, 1] + rng.normal(0.0, 0.1, size=200)
    return Dataset(y=y, t=t, x=x)


class TestLossValue:

    def test_squared(self):
        assert loss_value("squared", 1.3, 1.3) == 0.0
        assert loss_value(LossKind.SQUARED, 2.0, 0.5) == pytest.approx(2.25)

    @pytest.mark.parametrize("target", [0, 1])
    def test_logistic_at_zero_score(self, target):
        assert loss_value("logistic", 0.0, target) == pytest.approx(math.log(2.0), abs=1e-6)

    def test_logistic_requires_binary_target(self):
        with pytest.raises(DomainError):
            loss_value("logistic", 0.2, 0.5)

    def test_logistic_is_one_lipschitz(self):
        rng = Rng(7)
        f, g = rng.normal(0.0, 3.0, size=10_000), rng.normal(0.0, 3.0, size=10_000)
        z = rng.bernoulli(0.5, size=10_000)
        for a, b, target in zip(f[:500], g[:500], z[:500]):
            assert abs(loss_value("logistic", a, target) - loss_value("logistic", b, target)) <= abs(a - b) + 1e-12

    def test_squared_lipschitz_on_clipped_predictions(self):
        rng = Rng(8)
        m_prime, m = 4.0, 2.0
        for _ in range(500):
            a, b = rng.uniform_range(-m_prime, m_prime, 2)
            target = float(rng.uniform_range(-m, m))
            diff = abs(loss_value("squared", a, target) - loss_value("squared", b, target))
            assert diff <= 2 * (m_prime + m) * abs(a - b) + 1e-12


class TestAdam:

    def test_minimizes_quadratic(self):
        params = {"w": np.array([3.0, -2.0])}
        opt = Adam(lr=0.1)
        for _ in range(500):
            opt.step(params, {"w": 2.0 * params["w"]})
        npt.assert_allclose(params["w"], [0.0, 0.0], atol=5e-2)

    def test_first_step_size_is_learning_rate(self):
        params = {"w": np.array([1.0])}
        Adam(lr=0.01).step(params, {"w": np.array([5.0])})
        npt.assert_allclose(params["w"], [0.99], atol=1e-8)


class TestInputScaler:

    def test_maps_to_unit_box(self):
        X = np.array([[0.0, 5.0], [10.0, 5.0], [5.0, 5.0]])
        scaled = InputScaler.fit(X).transform(X)
        npt.assert_allclose(scaled[:, 0], [-1.0, 1.0, 0.0])
        npt.assert_array_equal(scaled[:, 1], [0.0, 0.0, 0.0])


class TestNuisanceTrainer:

    def test_training_reduces_loss(self, regression_data):
        model = train_nuisance(regression_data, MlpSpec(input_dim=4, widths=(16, 8)), FAST, Rng(0))
        assert model.final_loss <= model.initial_loss
        assert model.final_loss < 0.5 * model.initial_loss

    def test_outcome_uses_only_requested_arm(self, regression_data):
        trainer = NuisanceTrainer(FAST)
        model = trainer.fit(regression_data, MlpSpec(input_dim=4, widths=(8, 4)), Rng(0), arm=0)
        controls = regression_data.y[regression_data.t == 0]
        assert model.target_shift == pytest.approx(float(np.mean(controls)))

    def test_constant_target(self):
        rng = Rng(2)
        x = rng.normal(0.0, 1.0, size=(150, 3))
        data = Dataset(y=np.full(150, 2.5), t=np.zeros(150, dtype=int), x=x)
        cfg = TrainConfig(epochs=100, learning_rate=1e-2, patience=100)
        model = train_nuisance(data, MlpSpec(input_dim=3, widths=(8, 4)), cfg, Rng(0))
        assert abs(float(np.mean(model.predict(x))) - 2.5) <= 2.5 * 0.05 + 0.05

    def test_outcome_predictions_are_clipped(self, regression_data):
        cfg = TrainConfig(epochs=5, M_prime=0.5)
        model = train_nuisance(regression_data, MlpSpec(input_dim=4, widths=(8, 4)), cfg, Rng(0))
        assert np.max(np.abs(model.predict(regression_data.x))) <= 0.5

    def test_default_m_prime(self):
        assert default_outcome_m_prime(np.array([1.0, -3.0, 2.0])) == 6.0
        assert default_outcome_m_prime(np.zeros(3)) == 1.0

    def test_propensity_trimmed_and_accurate(self):
        rng = Rng(3)
        x = rng.normal(0.0, 1.0, size=(2000, 2))
        t = (x[:, 0] > 0).astype(int)
        data = Dataset(y=np.zeros(2000), t=t, x=x)
        cfg = TrainConfig(epochs=40, learning_rate=1e-2, batch_size=64, patience=40, epsilon=0.05)
        spec = MlpSpec(input_dim=2, widths=(16, 8), output_kind=OutputKind.PROPENSITY_LOGIT)
        model = train_nuisance(data, spec, cfg, Rng(0), kind=NuisanceKind.PROPENSITY)
        p = model.predict(x)
        assert p.min() >= 0.05 and p.max() <= 0.95
        assert np.mean((p > 0.5) == (t == 1)) >= 0.95

    def test_practical_cnn_trains(self, regression_data):
        spec = CnnSpec(d=4, S=2, variant=CnnVariant.PRACTICAL, channels_per_layer=[4, 2])
        model = train_nuisance(regression_data, spec, TrainConfig(epochs=5), Rng(0))
        assert model.final_loss <= model.initial_loss
        assert model.predict(regression_data.x).shape == (regression_data.n,)

    def test_deterministic(self, regression_data):
        spec = MlpSpec(input_dim=4, widths=(8, 4))
        first = train_nuisance(regression_data, spec, TrainConfig(epochs=3), Rng(5))
        second = train_nuisance(regression_data, spec, TrainConfig(epochs=3), Rng(5))
        for name in first.network.params:
            npt.assert_array_equal(first.network.params[name], second.network.params[name])

    def test_empty_arm(self, regression_data):
        treated_only = regression_data.subset(regression_data.t == 1)
        with pytest.raises(DataError):
            NuisanceTrainer(FAST).fit(treated_only, MlpSpec(input_dim=4), arm=0)

    def test_propensity_rejects_squared_loss(self, regression_data):
        cfg = TrainConfig(loss=LossKind.SQUARED, epochs=1)
        with pytest.raises(ConfigurationError):
            NuisanceTrainer(cfg).fit(regression_data, MlpSpec(input_dim=4), kind=NuisanceKind.PROPENSITY)

    def test_divergence_names_epoch(self, regression_data, monkeypatch):
        def exploding(self, raw, target):
            return float('nan'), np.zeros_like(raw)

        monkeypatch.setattr(training_controller._Objective, "__call__", exploding)
        with pytest.raises(DivergenceError) as info:
            NuisanceTrainer(FAST).fit(regression_data, MlpSpec(input_dim=4, widths=(4, 4)))
        assert info.value.epoch == 0

    def test_publishes_training_event(self, regression_data):
        bus = EventBus()
        events = []
        bus.subscribe(TRAINING_FINISHED, events.append)
        NuisanceTrainer(TrainConfig(epochs=2), bus).fit(regression_data, MlpSpec(input_dim=4, widths=(4, 4)))
        assert len(events) == 1
        assert events[0]["kind"] == "outcome" and events[0]["publisher"] == "NuisanceTrainer"
