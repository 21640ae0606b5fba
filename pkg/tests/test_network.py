import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from pydantic import ValidationError

from causalnet.controllers.training_controller import LossKind, _Objective
from causalnet.models.network import (ChannelCnn, CnnSpec, CnnVariant, FilterMask, Mlp, MlpSpec, StructuredBias,
                                      StructuredCnn, build_network, cnn_forward, conv_layer_forward,
                                      enumerate_parameter_slots, parameter_count, rate_schedule, toeplitz_matrix)
from causalnet.utils.errors import StructuralError
from causalnet.utils.numeric import Rng


def randomized(net, seed):
    """Rede inicializada com todos os parâmetros (inclusive vieses) aleatórios."""
    rng = Rng(seed)
    net.initialize(rng.substream(0))
    noise = rng.substream(1)
    net.params = {k: noise.normal(0.0, 0.5, size=v.shape) for k, v in net.params.items()}
    return net


def numeric_gradients(net, X, target, objective, h=1e-6):
    grads = {}
    for name, value in net.params.items():
        g = np.zeros_like(value)
        for idx in np.ndindex(value.shape):
            original = value[idx]
            value[idx] = original + h
            up, _ = objective(net.predict_raw(X), target)
            value[idx] = original - h
            down, _ = objective(net.predict_raw(X), target)
            value[idx] = original
            g[idx] = (up - down) / (2 * h)
        grads[name] = g
    return grads


def assert_gradients_match(net, X, target, objective):
    raw, caches = net.forward(X)
    _, grad_raw = objective(raw, target)
    analytic = net.backward(grad_raw, caches)
    numeric = numeric_gradients(net, X, target, objective)
    assert set(analytic) == set(net.params)
    for name in net.params:
        npt.assert_allclose(analytic[name], numeric[name], rtol=1e-4, atol=1e-7, err_msg=name)


class TestConvolution:

    def test_hand_examples(self):
        npt.assert_allclose(conv_layer_forward([1, -1, 2], [1, 1], 0.0), [1, 0, 1, 2])
        npt.assert_allclose(conv_layer_forward([1, 0], [2, 0], [-1, -1, -1]), [3, 1, 1])

    def test_zero_mask_gives_zero(self):
        out = conv_layer_forward(np.arange(5.0), FilterMask((0, 0, 0)), 0.0)
        npt.assert_array_equal(out, np.zeros(7))

    @settings(max_examples=1000, deadline=None)
    @given(st.integers(min_value=1, max_value=12), st.integers(min_value=1, max_value=4),
           st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_matches_toeplitz_product(self, d, S, seed):
        rng = Rng(seed)
        h = rng.normal(0.0, 1.0, size=d)
        taps = rng.normal(0.0, 1.0, size=S + 1)
        bias = rng.normal(0.0, 1.0, size=d + S)
        expected = np.maximum(toeplitz_matrix(taps, d) @ h - bias, 0.0)
        npt.assert_allclose(conv_layer_forward(h, taps, bias), expected, rtol=0, atol=1e-12)
        npt.assert_allclose(toeplitz_matrix(taps, d) @ h, np.convolve(h, taps), atol=1e-12)

    def test_toeplitz_band(self):
        W = toeplitz_matrix(FilterMask((1, 2, 3)), 4)
        assert W.shape == (6, 4)
        assert W[2, 0] == 3 and W[0, 0] == 1 and W[3, 0] == 0

    def test_structured_bias_layout(self):
        bias = StructuredBias(head=(1, 2), middle=5, tail=(3, 4), layer_size=7)
        npt.assert_array_equal(bias.materialize(), [1, 2, 5, 5, 5, 3, 4])
        out = conv_layer_forward(np.ones(5), FilterMask((1, 1, 1)), bias)
        assert out.shape == (7,)

    def test_structured_bias_too_short(self):
        with pytest.raises(StructuralError):
            StructuredBias(head=(1, 2), middle=0, tail=(3, 4), layer_size=3)

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError):
            conv_layer_forward([1.0, 2.0], [1.0, 1.0], [0.0, 0.0])
        with pytest.raises(StructuralError):
            conv_layer_forward(np.ones((2, 2)), [1.0], 0.0)


class TestStructuredCnn:

    def test_hand_evaluated_forward(self):
        net = StructuredCnn(CnnSpec(d=2, S=2, L=1, E=1))
        net.params = {"conv1.mask": np.ones((1, 3)), "conv1.bias": np.zeros((1, 4)),
                      "readout": np.ones((1, 4))}
        assert cnn_forward(net, [1.0, 1.0]) == pytest.approx(6.0)

    def test_zero_parameters(self):
        net = StructuredCnn(CnnSpec(d=4, S=2, L=3, E=2)).initialize(Rng(0))
        net.params = {k: np.zeros_like(v) for k, v in net.params.items()}
        assert cnn_forward(net, np.arange(4.0)) == 0.0

    def test_clipping(self):
        net = randomized(StructuredCnn(CnnSpec(d=3, S=2, L=2, E=2, M_prime=0.01)), 3)
        net.params["readout"] = np.full_like(net.params["readout"], 50.0)
        assert abs(cnn_forward(net, [5.0, 5.0, 5.0])) <= 0.01

    @pytest.mark.parametrize("d,S,L", [(2, 2, 1), (4, 2, 3), (6, 3, 4), (10, 2, 5)])
    def test_shape_law(self, d, S, L):
        net = StructuredCnn(CnnSpec(d=d, S=S, L=L, E=2)).initialize(Rng(1))
        lengths = net.layer_lengths(Rng(2).normal(0.0, 1.0, size=(3, d)))
        assert lengths == [d + S * l for l in range(L + 1)]

    def test_input_size_mismatch(self):
        net = StructuredCnn(CnnSpec(d=3, S=2)).initialize(Rng(0))
        with pytest.raises(StructuralError):
            cnn_forward(net, [1.0, 2.0])

    def test_invalid_specs(self):
        with pytest.raises(ValidationError):
            CnnSpec(d=2, S=3)
        with pytest.raises(ValidationError):
            CnnSpec(d=10, S=2, L=3, require_approximation_regime=True)
        with pytest.raises(ValidationError):
            CnnSpec(d=3, S=2, unknown=1)

    def test_build_network_dispatch(self):
        assert isinstance(build_network(CnnSpec(d=3, S=2)), StructuredCnn)
        assert isinstance(build_network(CnnSpec(d=3, variant=CnnVariant.PRACTICAL)), ChannelCnn)
        assert isinstance(build_network(MlpSpec(input_dim=3)), Mlp)


class TestParameterCount:

    def test_worked_values(self):
        assert parameter_count(CnnSpec(d=2, S=2, L=2, E=1)) == 42
        assert parameter_count(CnnSpec(d=3, S=2, L=3, E=2)) == 162

    @settings(max_examples=50)
    @given(st.integers(min_value=1, max_value=4), st.integers(min_value=2, max_value=12),
           st.integers(min_value=1, max_value=8), st.data())
    def test_matches_enumeration(self, E, d, L, data):
        S = data.draw(st.integers(min_value=2, max_value=d))
        spec = CnnSpec(d=d, S=S, L=L, E=E)
        assert parameter_count(spec) == enumerate_parameter_slots(spec)

    def test_practical_variant_unsupported(self):
        with pytest.raises(StructuralError):
            parameter_count(CnnSpec(d=4, variant=CnnVariant.PRACTICAL))


class TestRateSchedule:

    def test_worked_values(self):
        assert rate_schedule(10000, 10) == (46, 103)
        assert rate_schedule(100, 2) == (3, 28)

    def test_invalid_arguments(self):
        with pytest.raises(StructuralError):
            rate_schedule(1, 3)
        with pytest.raises(StructuralError):
            rate_schedule(100, 3, c_E=0.0)


SQUARED = _Objective(LossKind.SQUARED, shift=0.0, scale=1.0, m_prime=1e6)
LOGISTIC = _Objective(LossKind.LOGISTIC, shift=0.0, scale=1.0, m_prime=float('inf'))


class TestGradients:

    @pytest.fixture(params=["squared", "logistic"])
    def objective(self, request):
        return SQUARED if request.param == "squared" else LOGISTIC

    def _targets(self, objective, rng, n):
        if objective is LOGISTIC:
            return rng.bernoulli(0.5, size=n).astype(float)
        return rng.normal(0.0, 1.0, size=n)

    @pytest.mark.parametrize("loss", ["squared", "logistic"])
    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=2, max_value=6), st.integers(min_value=1, max_value=3),
           st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=2 ** 32 - 1), st.data())
    def test_theoretical_variant(self, loss, d, L, E, seed, data):
        S = data.draw(st.integers(min_value=2, max_value=d))
        objective = SQUARED if loss == "squared" else LOGISTIC
        net = randomized(StructuredCnn(CnnSpec(d=d, S=S, L=L, E=E)), seed)
        rng = Rng(seed).substream(2)
        X = rng.normal(0.0, 1.0, size=(4, d))
        assert_gradients_match(net, X, self._targets(objective, rng, 4), objective)

    @pytest.mark.parametrize("loss", ["squared", "logistic"])
    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=1, max_value=5), st.integers(min_value=1, max_value=3),
           st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=2),
           st.integers(min_value=1, max_value=2), st.integers(min_value=0, max_value=2),
           st.lists(st.integers(min_value=1, max_value=4), max_size=1),
           st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_practical_variant(self, loss, d, S, channels, n_series, n_static, head, seed):
        objective = SQUARED if loss == "squared" else LOGISTIC
        spec = CnnSpec(d=d, S=S, variant=CnnVariant.PRACTICAL, channels_per_layer=channels, n_series=n_series,
                       n_static=n_static, static_branch_widths=[2], head_widths=head)
        net = randomized(ChannelCnn(spec), seed)
        rng = Rng(seed).substream(2)
        X = rng.normal(0.0, 1.0, size=(4, spec.input_dim))
        assert_gradients_match(net, X, self._targets(objective, rng, 4), objective)

    @pytest.mark.parametrize("seed", range(3))
    def test_mlp(self, objective, seed):
        net = randomized(Mlp(MlpSpec(input_dim=3, widths=(5, 4))), seed)
        rng = Rng(300 + seed)
        X = rng.normal(0.0, 1.0, size=(7, 3))
        assert_gradients_match(net, X, self._targets(objective, rng, 7), objective)

    def test_objective_gradient_wrt_score(self, objective):
        rng = Rng(9)
        raw = rng.normal(0.0, 1.0, size=8)
        target = self._targets(objective, rng, 8)
        _, grad = objective(raw, target)
        h = 1e-6
        for i in range(8):
            up, down = raw.copy(), raw.copy()
            up[i] += h
            down[i] -= h
            fd = (objective(up, target)[0] - objective(down, target)[0]) / (2 * h)
            assert grad[i] == pytest.approx(fd, rel=1e-4, abs=1e-8)
