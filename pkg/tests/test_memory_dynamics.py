"""
Tests for the forward dynamics of the continuous stack, queue and deque.
"""

import copy
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.exceptions import DimensionError, NumericInputError
from core.types import MemoryKind
from memory import (
    MemorySignals, MemoryState, deque_step, discrete_limit_mismatch, discrete_reference,
    empty_state, memory_step, queue_step, random_binary_signals, stack_step, step_tie_margin,
)
from memory.kernels import exclusive_cumsum, pop, read_weights


def _scalar_signals(value, pop_amount, push):
    return MemorySignals(np.array([value]), pop_amount, push)


def _run(kind, signals, width=1):
    state = empty_state(kind, width)
    states, reads = [state], []
    for sig in signals:
        state, read = memory_step(state, sig)
        states.append(state)
        reads.append(read)
    return states, reads


class TestKernels:
    """Test the reading-end-first pop and read kernels."""

    @pytest.mark.unit
    def test_exclusive_cumsum(self):
        """Test the exclusive prefix sum."""
        np.testing.assert_array_equal(exclusive_cumsum(np.array([1.0, 2.0, 3.0])), [0.0, 1.0, 3.0])
        assert exclusive_cumsum(np.zeros(0)).shape == (0,)

    @pytest.mark.unit
    def test_pop_removes_from_reading_end(self):
        """Test pop consumes strength from index 0 onwards."""
        np.testing.assert_allclose(pop(np.array([0.5, 0.7]), 0.9), [0.0, 0.3], atol=1e-15)

    @pytest.mark.unit
    def test_read_weights_sum_to_unit_mass(self):
        """Test read weights cap at one unit of total mass."""
        weights = read_weights(np.array([0.9, 0.0, 0.3]))
        np.testing.assert_allclose(weights, [0.9, 0.0, 0.1], atol=1e-15)


class TestStackStep:
    """Test the continuous stack."""

    @pytest.mark.unit
    def test_three_step_trace(self):
        """Test strengths and reads of the reference three-step trace."""
        steps = [(1.0, 0.0, 0.8), (2.0, 0.1, 0.5), (3.0, 0.9, 0.9)]
        expected_strengths = [[0.8], [0.7, 0.5], [0.3, 0.0, 0.9]]
        expected_reads = [0.8, 1.5, 2.8]

        states, reads = _run(MemoryKind.STACK, [_scalar_signals(*s) for s in steps])

        for state, strengths in zip(states[1:], expected_strengths):
            np.testing.assert_allclose(state.strengths, strengths, atol=1e-12)
        for read, value in zip(reads, expected_reads):
            assert read.read[0] == pytest.approx(value, abs=1e-12)
        np.testing.assert_array_equal(states[-1].values[:, 0], [1.0, 2.0, 3.0])

    @pytest.mark.unit
    def test_pop_on_empty_is_noop(self):
        """Test popping an empty stack removes nothing."""
        x = np.array([0.25, -1.5])
        state, read = stack_step(empty_state(MemoryKind.STACK, 2), MemorySignals(x, 0.7, 1.0))

        np.testing.assert_array_equal(state.strengths, [1.0])
        np.testing.assert_array_equal(read.read, x)

    @pytest.mark.unit
    def test_full_pop_then_push(self):
        """Test a unit pop removes the old top before the new push."""
        v1, v2 = np.array([1.0, 2.0]), np.array([-3.0, 4.0])
        prev = MemoryState.from_arrays(MemoryKind.STACK, v1[None, :], [1.0])
        state, read = stack_step(prev, MemorySignals(v2, 1.0, 1.0))

        np.testing.assert_array_equal(state.strengths, [0.0, 1.0])
        np.testing.assert_array_equal(read.read, v2)

    @pytest.mark.unit
    def test_empty_read_is_zero(self):
        """Test a zero-strength push reads the zero vector."""
        _, read = stack_step(empty_state(MemoryKind.STACK, 3), MemorySignals(np.ones(3), 0.0, 0.0))
        np.testing.assert_array_equal(read.read, np.zeros(3))


class TestQueueStep:
    """Test the continuous queue."""

    @pytest.mark.unit
    def test_unit_pushes_read_front(self):
        """Test the front of the queue is the first value pushed."""
        v1, v2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        _, reads = _run(MemoryKind.QUEUE, [MemorySignals(v1, 0.0, 1.0), MemorySignals(v2, 0.0, 1.0)], width=2)
        np.testing.assert_array_equal(reads[1].read, v1)

    @pytest.mark.unit
    def test_two_step_trace(self):
        """Test the front pop and the split read of a two-step trace."""
        states, reads = _run(MemoryKind.QUEUE, [_scalar_signals(1.0, 0.0, 0.6), _scalar_signals(2.0, 0.5, 0.9)])

        np.testing.assert_allclose(states[-1].strengths, [0.1, 0.9], atol=1e-12)
        assert reads[-1].read[0] == pytest.approx(1.9, abs=1e-12)

    @pytest.mark.unit
    def test_full_front_pop(self):
        """Test a unit pop empties the front row."""
        v1, v2 = np.array([5.0]), np.array([7.0])
        prev = MemoryState.from_arrays(MemoryKind.QUEUE, v1[None, :], [1.0])
        state, read = queue_step(prev, MemorySignals(v2, 1.0, 1.0))

        np.testing.assert_array_equal(state.strengths, [0.0, 1.0])
        np.testing.assert_array_equal(read.read, v2)

    @pytest.mark.unit
    def test_reversal_duality(self, rng):
        """Test the queue update equals the stack update on reversed strengths."""
        strengths = rng.uniform(0.0, 1.0, size=6)
        values = rng.standard_normal((6, 2))
        amount = 0.8
        sig = MemorySignals(np.zeros(2), amount, 0.0)

        queue_state, _ = queue_step(MemoryState.from_arrays(MemoryKind.QUEUE, values, strengths), sig)
        stack_state, _ = stack_step(MemoryState.from_arrays(MemoryKind.STACK, values[::-1], strengths[::-1]), sig)

        np.testing.assert_array_equal(queue_state.strengths[:-1], stack_state.strengths[:-1][::-1])


class TestDequeStep:
    """Test the continuous deque."""

    @pytest.mark.unit
    def test_one_step_from_empty(self):
        """Test both reads after pushing at both ends of an empty deque."""
        sig = MemorySignals(np.array([2.0]), 0.0, 0.5, value_bot=np.array([1.0]), pop_bot=0.0, push_bot=0.5)
        state, read = deque_step(empty_state(MemoryKind.DEQUE, 1), sig)

        np.testing.assert_array_equal(state.strengths, [0.5, 0.5])
        np.testing.assert_array_equal(state.values[:, 0], [1.0, 2.0])
        assert read.read[0] == pytest.approx(1.5)
        assert read.read_bot[0] == pytest.approx(1.5)

    @pytest.mark.unit
    def test_rows_grow_at_both_ends(self, rng):
        """Test each step adds one row per end and keeps relative order."""
        states, _ = _run(MemoryKind.DEQUE, random_binary_signals(MemoryKind.DEQUE, 4, 2, rng), width=2)
        assert [s.rows for s in states] == [0, 2, 4, 6, 8]
        np.testing.assert_array_equal(states[3].values, states[4].values[1:-1])

    @pytest.mark.unit
    def test_top_reads_degenerate_to_stack(self, rng):
        """Test a deque with silent bottom signals reads like a stack."""
        width, steps = 3, 12
        stack_state = empty_state(MemoryKind.STACK, width)
        deque_state = empty_state(MemoryKind.DEQUE, width)
        for _ in range(steps):
            value = rng.standard_normal(width)
            pop_amount, push = rng.uniform(0.0, 1.0, size=2)
            stack_state, stack_read = stack_step(stack_state, MemorySignals(value, pop_amount, push))
            deque_state, deque_read = deque_step(deque_state, MemorySignals(
                value, pop_amount, push, value_bot=rng.standard_normal(width), pop_bot=0.0, push_bot=0.0))
            np.testing.assert_allclose(deque_read.read, stack_read.read, rtol=0, atol=1e-12)

    @pytest.mark.unit
    def test_bottom_reads_degenerate_to_queue(self, rng):
        """Test a deque pushed at the top and popped at the bottom reads like a queue."""
        width, steps = 3, 12
        queue_state = empty_state(MemoryKind.QUEUE, width)
        deque_state = empty_state(MemoryKind.DEQUE, width)
        for _ in range(steps):
            value = rng.standard_normal(width)
            pop_amount, push = rng.uniform(0.0, 1.0, size=2)
            queue_state, queue_read = queue_step(queue_state, MemorySignals(value, pop_amount, push))
            deque_state, deque_read = deque_step(deque_state, MemorySignals(
                value, 0.0, push, value_bot=rng.standard_normal(width), pop_bot=pop_amount, push_bot=0.0))
            np.testing.assert_allclose(deque_read.read_bot, queue_read.read, rtol=0, atol=1e-12)

    @pytest.mark.unit
    def test_requires_bottom_signals(self):
        """Test deque steps reject signals without a bottom end."""
        with pytest.raises(DimensionError):
            deque_step(empty_state(MemoryKind.DEQUE, 2), MemorySignals(np.zeros(2), 0.0, 1.0))


class TestSignalValidation:
    """Test rejection of malformed signals and states."""

    @pytest.mark.unit
    def test_width_mismatch(self):
        """Test a value of the wrong width raises DimensionError."""
        with pytest.raises(DimensionError):
            stack_step(empty_state(MemoryKind.STACK, 3), MemorySignals(np.zeros(2), 0.0, 1.0))

    @pytest.mark.unit
    def test_non_finite_value(self):
        """Test NaN values raise NumericInputError."""
        with pytest.raises(NumericInputError):
            stack_step(empty_state(MemoryKind.STACK, 1), MemorySignals(np.array([np.nan]), 0.0, 1.0))

    @pytest.mark.unit
    @pytest.mark.parametrize("pop_amount,push", [(1.5, 0.5), (0.5, -0.1), (np.inf, 0.5)])
    def test_signal_out_of_range(self, pop_amount, push):
        """Test pop and push outside [0, 1] raise NumericInputError."""
        with pytest.raises(NumericInputError):
            queue_step(empty_state(MemoryKind.QUEUE, 1), MemorySignals(np.zeros(1), pop_amount, push))

    @pytest.mark.unit
    def test_kind_mismatch(self):
        """Test a stack step on a queue state raises DimensionError."""
        with pytest.raises(DimensionError):
            stack_step(empty_state(MemoryKind.QUEUE, 1), MemorySignals(np.zeros(1), 0.0, 1.0))

    @pytest.mark.unit
    def test_empty_state_width(self):
        """Test zero-width memories are rejected."""
        with pytest.raises(DimensionError):
            empty_state(MemoryKind.STACK, 0)


class TestValueStorage:
    """Test append-only value storage shared between states."""

    @pytest.mark.unit
    def test_rows_are_immutable(self, rng):
        """Test earlier rows are bit-identical after later steps."""
        states, _ = _run(MemoryKind.STACK, [MemorySignals(rng.standard_normal(2), 0.3, 0.6) for _ in range(20)],
                         width=2)
        snapshot = states[5].values.copy()
        np.testing.assert_array_equal(states[-1].values[:5], snapshot)
        np.testing.assert_array_equal(states[5].values, snapshot)
        assert not states[5].values.flags.writeable
        assert not states[5].strengths.flags.writeable

    @pytest.mark.unit
    def test_branching_forks_buffer(self):
        """Test extending an older state leaves its sibling untouched."""
        root, _ = stack_step(empty_state(MemoryKind.STACK, 1), _scalar_signals(1.0, 0.0, 1.0))
        first, _ = stack_step(root, _scalar_signals(2.0, 0.0, 1.0))
        second, _ = stack_step(root, _scalar_signals(3.0, 0.0, 1.0))

        assert first.buffer is root.buffer
        assert second.buffer is not root.buffer
        np.testing.assert_array_equal(first.values[:, 0], [1.0, 2.0])
        np.testing.assert_array_equal(second.values[:, 0], [1.0, 3.0])

    @pytest.mark.unit
    def test_growth_past_capacity(self):
        """Test many steps keep every row."""
        state = empty_state(MemoryKind.DEQUE, 1)
        for t in range(40):
            state, _ = deque_step(state, MemorySignals(
                np.array([float(t)]), 0.0, 1.0, value_bot=np.array([-float(t)]), pop_bot=0.0, push_bot=1.0))
        assert state.rows == 80
        np.testing.assert_array_equal(state.values[:, 0], np.concatenate([-np.arange(40.0)[::-1], np.arange(40.0)]))


_unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestMemoryProperties:
    """Property tests over random continuous signals."""

    @pytest.mark.property
    @settings(max_examples=60, deadline=None)
    @given(kind=st.sampled_from([MemoryKind.STACK, MemoryKind.QUEUE]),
           steps=st.lists(st.tuples(_unit, _unit, st.floats(-5.0, 5.0)), min_size=1, max_size=10))
    def test_mass_and_read_bounds(self, kind, steps):
        """Test pop mass conservation, read normalization and the read bound."""
        state = empty_state(kind, 1)
        for pop_amount, push, value in steps:
            before = float(np.sum(state.strengths))
            state, read = memory_step(state, _scalar_signals(value, pop_amount, push))

            kept = float(np.sum(state.strengths[:-1]))
            assert kept == pytest.approx(max(0.0, before - pop_amount), abs=1e-12)

            assert np.all(read.weights >= 0.0) and np.all(read.weights <= 1.0)
            assert float(np.sum(read.weights)) == pytest.approx(min(1.0, float(np.sum(state.strengths))), abs=1e-12)

            bound = float(np.max(np.abs(state.values)))
            assert abs(read.read[0]) <= bound + 1e-12

    @pytest.mark.property
    @settings(max_examples=40, deadline=None)
    @given(steps=st.lists(st.tuples(_unit, _unit, _unit, _unit), min_size=1, max_size=8))
    def test_deque_strengths_in_unit_interval(self, steps):
        """Test deque strengths stay in [0, 1] and pops conserve mass in order."""
        state = empty_state(MemoryKind.DEQUE, 1)
        for pop_top, push_top, pop_bot, push_bot in steps:
            before = float(np.sum(state.strengths))
            state, read = deque_step(state, MemorySignals(
                np.array([1.0]), pop_top, push_top, value_bot=np.array([-1.0]), pop_bot=pop_bot, push_bot=push_bot))

            assert np.all(state.strengths >= 0.0) and np.all(state.strengths <= 1.0)
            kept = float(np.sum(state.strengths[1:-1]))
            assert kept == pytest.approx(max(0.0, max(0.0, before - pop_top) - pop_bot), abs=1e-12)
            assert float(np.sum(read.weights_bot)) <= 1.0 + 1e-12


def _binary_choices(kind):
    bits = list(itertools.product((0.0, 1.0), repeat=4 if kind is MemoryKind.DEQUE else 2))
    return bits


def _binary_signal(kind, bits, t):
    value = np.array([t + 1.0, -0.5 * (t + 1.0)])
    if kind is MemoryKind.DEQUE:
        return MemorySignals(value, bits[0], bits[1], value_bot=value + 100.0, pop_bot=bits[2], push_bot=bits[3])
    return MemorySignals(value, bits[0], bits[1])


def _exhaustive_mismatch(kind, max_len):
    """Depth-first walk over every binary signal sequence up to ``max_len``."""
    worst = 0.0
    stack = [(empty_state(kind, 2), discrete_reference(kind, 2), 0)]
    while stack:
        state, oracle, depth = stack.pop()
        if depth == max_len:
            continue
        for bits in _binary_choices(kind):
            sig = _binary_signal(kind, bits, depth)
            branch = copy.deepcopy(oracle)
            expected = branch.step(sig)
            new_state, read = memory_step(state, sig)
            if kind is MemoryKind.DEQUE:
                worst = max(worst, float(np.max(np.abs(read.read - expected[0]))),
                            float(np.max(np.abs(read.read_bot - expected[1]))))
            else:
                worst = max(worst, float(np.max(np.abs(read.read - expected))))
            stack.append((new_state, branch, depth + 1))
    return worst


class TestDiscreteLimit:
    """Test agreement with discrete structures under binary signals."""

    @pytest.mark.property
    @pytest.mark.parametrize("kind", [MemoryKind.STACK, MemoryKind.QUEUE])
    def test_exhaustive_stack_queue(self, kind):
        """Test every binary sequence up to length 8."""
        assert _exhaustive_mismatch(kind, 8) == 0.0

    @pytest.mark.property
    def test_exhaustive_deque(self):
        """Test every binary deque sequence up to length 4."""
        assert _exhaustive_mismatch(MemoryKind.DEQUE, 4) == 0.0

    @pytest.mark.unit
    def test_empty_sequence(self):
        """Test the empty sequence has no mismatch."""
        assert discrete_limit_mismatch(MemoryKind.STACK, []) == 0.0

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", list(MemoryKind))
    def test_random_long_sequences(self, kind):
        """Test 10,000 random binary sequences up to length 64, past the exhaustive sweeps."""
        rng = np.random.default_rng(99)
        shortest = 5 if kind is MemoryKind.DEQUE else 9
        for _ in range(10_000):
            steps = int(rng.integers(shortest, 65))
            assert discrete_limit_mismatch(kind, random_binary_signals(kind, steps, 3, rng)) == 0.0


class TestTieMargin:
    """Test distance to min/max switching points."""

    @pytest.mark.unit
    def test_binary_signals_sit_on_ties(self):
        """Test a unit pop of a unit row is a tie."""
        prev = MemoryState.from_arrays(MemoryKind.STACK, np.ones((1, 1)), [1.0])
        assert step_tie_margin(prev, _scalar_signals(2.0, 1.0, 1.0)) == 0.0

    @pytest.mark.unit
    def test_generic_margin(self):
        """Test the margin of a configuration away from every switching point."""
        prev = MemoryState.from_arrays(MemoryKind.STACK, np.ones((1, 1)), [0.3])
        assert step_tie_margin(prev, _scalar_signals(2.0, 0.1, 0.45)) == pytest.approx(0.1)

    @pytest.mark.unit
    def test_empty_state_pop_is_free(self):
        """Test an empty state contributes no pop switching points."""
        margin = step_tie_margin(empty_state(MemoryKind.QUEUE, 1), _scalar_signals(1.0, 0.4, 0.3))
        assert margin == pytest.approx(0.7)
