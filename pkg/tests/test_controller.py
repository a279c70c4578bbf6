"""
Tests for the LSTM cell, the memory controller, the deep LSTM and the
parameter layout.
"""

import numpy as np
import pytest
from scipy.special import expit

from config.schema import ModelConfig
from controller import (
    LstmParameters, ParameterSet, controller_step, count_parameters, init_parameters,
    lstm_cell, lstm_cell_backward, parameter_shapes, recurrent_layer,
)
from controller.memory_lstm import initial_state
from controller.parameters import group_of
from controller.recurrent import DEEP_LAYER, MEMORY_LAYER
from core.exceptions import DimensionError
from core.types import ModelKind
from memory import step_tie_margin
from training.gradcheck import relative_error

STEP = 1e-6


def _numeric_gradient(loss, array):
    grad = np.zeros_like(array)
    flat, out = array.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + STEP
        plus = loss()
        flat[i] = original - STEP
        minus = loss()
        flat[i] = original
        out[i] = (plus - minus) / (2 * STEP)
    return grad


def _max_relative_error(analytic, numeric):
    return max((relative_error(a, n) for a, n in zip(np.ravel(analytic), np.ravel(numeric))), default=0.0)


def _perturbed(model, rng, scale=0.3):
    return model.with_params(model.params.map(lambda a: a + rng.uniform(-scale, scale, size=a.shape)))


class TestLstmCell:
    """Test the LSTM cell."""

    @pytest.mark.unit
    def test_zero_weights_give_zero_output(self, rng):
        """Test a zero cell maps any input to a zero hidden state."""
        params = LstmParameters(np.zeros((16, 7)), np.zeros(16))
        (h, c), out, _ = lstm_cell(params, (np.zeros(4), np.zeros(4)), rng.standard_normal(3))

        np.testing.assert_array_equal(h, np.zeros(4))
        np.testing.assert_array_equal(out, h)

    @pytest.mark.unit
    def test_forget_bias_keeps_cell(self):
        """Test a unit forget bias scales the cell by sigmoid(1)."""
        b = np.zeros(8)
        b[2:4] = 1.0
        params = LstmParameters(np.zeros((8, 3)), b)
        (_, c), _, _ = lstm_cell(params, (np.zeros(2), np.ones(2)), np.zeros(1))

        np.testing.assert_allclose(c, [0.7310585786300049] * 2, rtol=1e-12)

    @pytest.mark.unit
    def test_width_mismatch(self):
        """Test inputs of the wrong width raise DimensionError."""
        params = LstmParameters(np.zeros((8, 3)), np.zeros(8))
        with pytest.raises(DimensionError):
            lstm_cell(params, (np.zeros(2), np.zeros(2)), np.zeros(2))

    @pytest.mark.unit
    def test_backward_matches_finite_differences(self, rng):
        """Test every LSTM adjoint against central differences."""
        H, n_in = 3, 2
        W = rng.uniform(-0.5, 0.5, (4 * H, n_in + H))
        b = rng.uniform(-0.5, 0.5, 4 * H)
        x, h_prev, c_prev = rng.standard_normal(n_in), rng.standard_normal(H), rng.standard_normal(H)
        a, k = rng.standard_normal(H), rng.standard_normal(H)

        def loss():
            (h, c), _, _ = lstm_cell(LstmParameters(W, b), (h_prev, c_prev), x)
            return float(a @ h + k @ c)

        params = LstmParameters(W, b)
        _, _, cache = lstm_cell(params, (h_prev, c_prev), x)
        grads = lstm_cell_backward(params, cache, a, k)

        for analytic, array in ((grads.dx, x), (grads.dh_prev, h_prev), (grads.dc_prev, c_prev),
                                (grads.dW, W), (grads.db, b)):
            assert _max_relative_error(analytic, _numeric_gradient(loss, array)) < 1e-6


def _unrolled(model, inputs, weights):
    """Run the recurrent layer over ``inputs``; loss is sum_t weights[t] . o_t."""
    layer = recurrent_layer(model.config)
    state = layer.initial_state(model)
    caches, total = [], 0.0
    for i_t, w_t in zip(inputs, weights):
        state, o, cache = layer.step(model, state, i_t)
        caches.append(cache)
        total += float(w_t @ o)
    return total, caches, state


def _unrolled_gradients(model, inputs, weights):
    layer = recurrent_layer(model.config)
    _, caches, final = _unrolled(model, inputs, weights)
    grads = model.params.zeros_like()
    d_state = layer.zero_adjoint(final)
    d_inputs = [None] * len(inputs)
    for t in reversed(range(len(inputs))):
        d_inputs[t], d_state = layer.step_backward(model, caches[t], weights[t], d_state, grads)
    layer.finish_backward(model, d_state, grads)
    return grads, d_inputs


def _check_unrolled(model, rng, steps=3):
    E, H = model.config.embedding, model.config.hidden
    inputs = [rng.standard_normal(E) for _ in range(steps)]
    weights = [rng.standard_normal(H) for _ in range(steps)]
    grads, d_inputs = _unrolled_gradients(model, inputs, weights)

    worst = 0.0
    for name, array in model.params.items():
        numeric = _numeric_gradient(lambda: _unrolled(model, inputs, weights)[0], array)
        worst = max(worst, _max_relative_error(grads[name], numeric))
    for t, i_t in enumerate(inputs):
        numeric = _numeric_gradient(lambda: _unrolled(model, inputs, weights)[0], i_t)
        worst = max(worst, _max_relative_error(d_inputs[t], numeric))
    return worst


def _tie_free(model, rng, steps=3):
    """Perturbed copy of ``model`` whose memory steps stay clear of ties."""
    for _ in range(50):
        candidate = _perturbed(model, rng)
        inputs = [rng.standard_normal(model.config.embedding) for _ in range(steps)]
        _, caches, _ = _unrolled(candidate, inputs, [np.zeros(model.config.hidden)] * steps)
        if min(step_tie_margin(c.prev_memory, c.signals) for c in caches) > 1e-4:
            return candidate
    raise AssertionError("no tie-free configuration found")


class TestControllerStep:
    """Test the memory-augmented controller."""

    @pytest.mark.unit
    def test_bias_only_signals(self, tiny_model, rng):
        """Test zero projection weights leave the signals at their biases."""
        model = tiny_model("stack-lstm")
        params = model.params.copy()
        for name in ("memory.W_d", "memory.W_u", "memory.W_v"):
            params[name][:] = 0.0
        model = model.with_params(params)

        state = initial_state(model)
        for _ in range(3):
            state, _, cache = controller_step(model, state, rng.standard_normal(model.config.embedding))
            assert cache.signals.pop == pytest.approx(0.2689414213699951, abs=1e-12)
            assert cache.signals.push == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.unit
    @pytest.mark.parametrize("kind", ["stack-lstm", "queue-lstm", "deque-lstm"])
    def test_zero_values_read_zero(self, tiny_model, rng, kind):
        """Test zero value projections make every read zero."""
        model = tiny_model(kind)
        params = model.params.copy()
        for name in params.names():
            if name.startswith("memory.W_v") or name.startswith("memory.b_v"):
                params[name][:] = 0.0
        model = model.with_params(params)

        state = initial_state(model)
        for _ in range(4):
            state, _, _ = controller_step(model, state, rng.standard_normal(model.config.embedding))
            for read in state.reads:
                np.testing.assert_array_equal(read, np.zeros(model.config.memory_width))

    @pytest.mark.unit
    def test_deterministic(self, tiny_model, rng):
        """Test identical inputs give bit-identical outputs."""
        model = tiny_model("deque-lstm")
        i_t = rng.standard_normal(model.config.embedding)
        state = initial_state(model)
        first = controller_step(model, state, i_t)
        second = controller_step(model, state, i_t)

        np.testing.assert_array_equal(first[1], second[1])
        np.testing.assert_array_equal(first[0].memory.strengths, second[0].memory.strengths)

    @pytest.mark.unit
    def test_signals_in_open_interval(self, tiny_model, rng):
        """Test sigmoid signals satisfy the memory preconditions."""
        model = _perturbed(tiny_model("deque-lstm"), rng, scale=2.0)
        state = initial_state(model)
        for _ in range(10):
            state, _, cache = controller_step(model, state, 3.0 * rng.standard_normal(model.config.embedding))
            for value in (cache.signals.pop, cache.signals.push, cache.signals.pop_bot, cache.signals.push_bot):
                assert 0.0 < value < 1.0

    @pytest.mark.unit
    def test_deep_model_has_no_memory_controller(self, tiny_model):
        """Test deep LSTMs are rejected by the memory controller."""
        with pytest.raises(DimensionError):
            initial_state(tiny_model("lstm-2"))

    @pytest.mark.unit
    @pytest.mark.parametrize("kind", ["stack-lstm", "queue-lstm", "deque-lstm"])
    def test_unrolled_backward(self, tiny_model, rng, kind):
        """Test a three-step unrolled controller against central differences."""
        model = _tie_free(tiny_model(kind), rng)
        assert _check_unrolled(model, rng) < 1e-5


class TestDeepLstm:
    """Test the stacked LSTM benchmark."""

    @pytest.mark.unit
    def test_layer_selection(self, tiny_config):
        """Test deep kinds use the deep layer and memory kinds the controller."""
        assert recurrent_layer(tiny_config("lstm-4")) is DEEP_LAYER
        assert recurrent_layer(tiny_config("queue-lstm")) is MEMORY_LAYER

    @pytest.mark.unit
    def test_zero_weights_output_bias(self, tiny_model, rng):
        """Test a zero output projection yields tanh of its bias."""
        model = tiny_model("lstm-1")
        params = model.params.copy()
        params["output.W_o"][:] = 0.0
        params["output.b_o"][:] = rng.standard_normal(model.config.hidden)
        model = model.with_params(params)

        layer = recurrent_layer(model.config)
        _, o, _ = layer.step(model, layer.initial_state(model), rng.standard_normal(model.config.embedding))
        np.testing.assert_allclose(o, np.tanh(params["output.b_o"]), rtol=1e-15)

    @pytest.mark.unit
    def test_layer_shapes(self):
        """Test concatenation widths of a four-layer stack."""
        shapes = parameter_shapes(ModelConfig(kind="lstm-4", hidden=8, embedding=4))
        assert shapes["lstm.0.W"] == (32, 12)
        for k in (1, 2, 3):
            assert shapes[f"lstm.{k}.W"] == (32, 16)
        assert "lstm.4.W" not in shapes

    @pytest.mark.unit
    def test_two_layer_backward(self, tiny_model, rng):
        """Test a two-layer unrolled stack against central differences."""
        model = _perturbed(tiny_model("lstm-2"), rng)
        assert _check_unrolled(model, rng) < 1e-5


class TestInitialization:
    """Test parameter initialization."""

    @pytest.mark.unit
    def test_same_seed_same_parameters(self, tiny_config):
        """Test initialization is deterministic."""
        first = init_parameters(tiny_config("deque-lstm"), 7)
        second = init_parameters(tiny_config("deque-lstm"), 7)
        for name, array in first.items():
            np.testing.assert_array_equal(array, second[name])

    @pytest.mark.unit
    def test_different_seeds_differ(self, tiny_config):
        """Test different seeds give different weights."""
        first = init_parameters(tiny_config(), 1)
        second = init_parameters(tiny_config(), 2)
        assert not np.array_equal(first["lstm.0.W"], second["lstm.0.W"])

    @pytest.mark.unit
    def test_pop_bias(self, tiny_config):
        """Test every pop bias starts at -1."""
        for kind in ("stack-lstm", "queue-lstm"):
            assert init_parameters(tiny_config(kind), 0)["memory.b_u"][0] == -1.0
        params = init_parameters(tiny_config("deque-lstm"), 0)
        assert params["memory.b_u"][0] == -1.0
        assert params["memory.b_u_bot"][0] == -1.0

    @pytest.mark.unit
    def test_forget_bias_and_ranges(self, tiny_config):
        """Test gate biases and the uniform weight range."""
        config = tiny_config("lstm-2", hidden=6)
        params = init_parameters(config, 0)
        b = params["lstm.1.b"]
        np.testing.assert_array_equal(b[6:12], np.ones(6))
        assert not np.any(b[:6]) and not np.any(b[12:])
        assert np.all(np.abs(params["lstm.0.W"]) <= config.init_scale)

    @pytest.mark.unit
    def test_initial_hidden_is_trainable(self, tiny_config):
        """Test h0 is random and trainable while reads and memory are not parameters."""
        params = init_parameters(tiny_config("stack-lstm"), 0)
        assert np.any(params["lstm.0.h0"])
        assert not any("read" in name or "strength" in name for name in params.names())

    @pytest.mark.unit
    def test_initial_state_is_zero(self, tiny_model):
        """Test the initial reads, cell and memory are zero."""
        model = tiny_model("deque-lstm")
        state = initial_state(model)
        assert len(state.reads) == 2
        assert not any(np.any(r) for r in state.reads)
        assert not np.any(state.c)
        assert state.memory.rows == 0
        np.testing.assert_array_equal(state.h, model.params["lstm.0.h0"])

    @pytest.mark.unit
    def test_float32_storage(self, tiny_config):
        """Test 32-bit precision reaches every array."""
        params = init_parameters(tiny_config(precision="float32"), 0)
        assert all(a.dtype == np.float32 for _, a in params.items())


class TestParameterCount:
    """Test trainable parameter counting."""

    @staticmethod
    def _count(kind, hidden=256):
        return count_parameters(ModelConfig(kind=kind, hidden=hidden, memory_width=256, embedding=64,
                                            source_vocab=128, target_vocab=128))

    @pytest.mark.unit
    @pytest.mark.parametrize("hidden", [4, 32, 256])
    def test_stack_equals_queue(self, hidden):
        """Test stack and queue controllers share one layout."""
        assert self._count("stack-lstm", hidden).as_dict() == self._count("queue-lstm", hidden).as_dict()

    @pytest.mark.unit
    @pytest.mark.parametrize("kind,published", [
        ("lstm-1", 3.3e5), ("lstm-2", 9.1e5), ("stack-lstm", 6.7e5), ("deque-lstm", 1.0e6),
    ])
    def test_published_scale(self, kind, published):
        """Test recurrent core counts against the published sizes."""
        assert abs(self._count(kind).core_total - published) <= 0.15 * published

    @pytest.mark.unit
    def test_exact_stack_core(self):
        """Test the stack controller core count at the published widths."""
        count = self._count("stack-lstm")
        assert count.breakdown["recurrent_core"] == 4 * 256 * (64 + 256 + 256) + 4 * 256 + 256
        assert count.breakdown["memory_interface"] == 2 * (256 + 1) + 256 * 256 + 256
        assert count.core_total == 657410

    @pytest.mark.unit
    def test_stack_near_two_layer(self):
        """Test the stack controller is comparable to a two-layer LSTM."""
        ratio = self._count("stack-lstm").core_total / self._count("lstm-2").core_total
        assert 0.6 <= ratio <= 1.1

    @pytest.mark.unit
    def test_deque_doubles_interface(self):
        """Test the deque carries twice the memory interface."""
        stack, deque = self._count("stack-lstm"), self._count("deque-lstm")
        assert deque.total > stack.total
        assert deque.breakdown["memory_interface"] == 2 * stack.breakdown["memory_interface"]

    @pytest.mark.unit
    def test_breakdown_sums_to_total(self, tiny_config):
        """Test the breakdown covers every initialized scalar."""
        config = tiny_config("deque-lstm")
        count = count_parameters(config).as_dict()
        assert count["total"] == init_parameters(config, 0).size
        assert count["total"] == sum(count[g] for g in
                                     ("embeddings", "recurrent_core", "memory_interface", "output_layer"))

    @pytest.mark.unit
    def test_no_memory_interface_for_deep(self):
        """Test deep LSTMs count no memory parameters."""
        assert self._count("lstm-8").breakdown["memory_interface"] == 0


class TestParameterSet:
    """Test the ordered parameter container."""

    @pytest.mark.unit
    def test_add_in_place(self):
        """Test add_ sums arrays in place."""
        params = ParameterSet({"a": np.ones(2), "b": np.zeros((1, 2))})
        params.add_(params.copy())
        np.testing.assert_array_equal(params["a"], [2.0, 2.0])
        assert params.size == 4
        assert params.max_abs() == 2.0

    @pytest.mark.unit
    def test_layout_mismatch(self):
        """Test mismatched layouts raise DimensionError."""
        with pytest.raises(DimensionError):
            ParameterSet({"a": np.ones(2)}).add_(ParameterSet({"a": np.ones(3)}))

    @pytest.mark.unit
    def test_finite_check(self):
        """Test non-finite entries are detected."""
        assert not ParameterSet({"a": np.array([1.0, np.inf])}).is_finite()

    @pytest.mark.unit
    @pytest.mark.parametrize("name,group", [
        ("embedding.input", "embeddings"), ("lstm.3.h0", "recurrent_core"),
        ("memory.W_v_bot", "memory_interface"), ("output.b_softmax", "output_layer"),
    ])
    def test_group_of(self, name, group):
        """Test parameter names map to their counting groups."""
        assert group_of(name) == group

    @pytest.mark.unit
    def test_kind_aliases(self):
        """Test the alias spellings of model kinds."""
        assert ModelKind.parse("lstm-stack") is ModelKind.STACK_LSTM
        assert ModelKind.parse("deep-lstm-4").layers == 4
        with pytest.raises(ValueError):
            ModelKind.parse("gru")


def test_sigmoid_reference():
    """Test the sigmoid constants used above."""
    assert expit(-1.0) == pytest.approx(0.2689414213699951)
    assert expit(1.0) == pytest.approx(0.7310585786300049)
