"""
Pytest configuration and fixtures for NDSQ tests.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from config.schema import ModelConfig  # noqa: E402
from core.types import ModelKind  # noqa: E402
from seqmodel import Vocabulary, build_model, encode_example  # noqa: E402
from tasks import build_task  # noqa: E402


@pytest.fixture
def rng():
    """Seeded numpy generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def temp_output_dir(tmp_path):
    """Temporary directory for run outputs."""
    out = tmp_path / "runs"
    out.mkdir()
    return out


@pytest.fixture
def tiny_config():
    """Factory for small model configurations of any kind."""
    def make(kind="stack-lstm", hidden=4, vocab=5, memory_width=3, embedding=3, **kwargs):
        return ModelConfig(kind=kind, hidden=hidden, memory_width=memory_width, embedding=embedding,
                           source_vocab=vocab, target_vocab=vocab, **kwargs)
    return make


@pytest.fixture
def small_vocab():
    """Five-symbol synthetic vocabulary."""
    return Vocabulary.synthetic(5)


@pytest.fixture
def tiny_model(tiny_config, small_vocab):
    """Factory for initialized tiny models."""
    def make(kind="stack-lstm", seed=0, **kwargs):
        return build_model(tiny_config(kind, vocab=small_vocab.source_size, **kwargs), small_vocab, seed)
    return make


@pytest.fixture
def short_example(small_vocab):
    """Example with source [3, 4, 5] and target [5, 4, 3]."""
    return encode_example([3, 4, 5], [5, 4, 3], small_vocab)


@pytest.fixture
def reverse_task():
    """Reversal task over five symbols."""
    return build_task("reverse", vocab_size=5)


@pytest.fixture(params=[kind.value for kind in ModelKind])
def any_model_kind(request):
    """Every model kind."""
    return request.param


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless --runslow is given."""
    skip_slow = pytest.mark.skip(reason="Test is slow, run with --runslow")

    for item in items:
        if "slow" in item.keywords and not config.getoption("--runslow"):
            item.add_marker(skip_slow)


def pytest_addoption(parser):
    """Add custom command line options."""
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )
