"""
Shared types and enums for the NDSQ core modules.
"""

from enum import Enum

import numpy as np


class MemoryKind(str, Enum):
    """Continuous memory structure attached to a controller."""
    STACK = "stack"
    QUEUE = "queue"
    DEQUE = "deque"


class ModelKind(str, Enum):
    """Recurrent architecture of a transduction model."""
    STACK_LSTM = "stack-lstm"
    QUEUE_LSTM = "queue-lstm"
    DEQUE_LSTM = "deque-lstm"
    LSTM_1 = "lstm-1"
    LSTM_2 = "lstm-2"
    LSTM_4 = "lstm-4"
    LSTM_8 = "lstm-8"

    @property
    def memory_kind(self):
        """Memory structure of this model, or None for deep LSTM benchmarks."""
        return _MEMORY_OF_MODEL.get(self)

    @property
    def layers(self) -> int:
        """Number of stacked LSTM layers."""
        if self.memory_kind is not None:
            return 1
        return int(self.value.split("-")[1])

    @classmethod
    def parse(cls, name: str) -> "ModelKind":
        """Resolve a model name, accepting the alias spellings."""
        key = str(name).strip().lower()
        key = _MODEL_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(kind.value for kind in cls)
            raise ValueError(f"unknown model '{name}' (expected one of: {choices})") from None


_MEMORY_OF_MODEL = {
    ModelKind.STACK_LSTM: MemoryKind.STACK,
    ModelKind.QUEUE_LSTM: MemoryKind.QUEUE,
    ModelKind.DEQUE_LSTM: MemoryKind.DEQUE,
}

_MODEL_ALIASES = {
    "lstm-stack": "stack-lstm",
    "lstm-queue": "queue-lstm",
    "lstm-deque": "deque-lstm",
    "deep-lstm-1": "lstm-1",
    "deep-lstm-2": "lstm-2",
    "deep-lstm-4": "lstm-4",
    "deep-lstm-8": "lstm-8",
}


class TaskKind(str, Enum):
    """Transduction task family."""
    COPY = "copy"
    REVERSE = "reverse"
    BIGRAM_FLIP = "bigram-flip"
    SVO_SOV = "svo-sov"
    GENDER = "gender"
    CUSTOM_GRAMMAR = "grammar"

    @property
    def is_synthetic(self) -> bool:
        return self in (TaskKind.COPY, TaskKind.REVERSE, TaskKind.BIGRAM_FLIP)


class Precision(str, Enum):
    """Floating point mode for parameters and activations."""
    FLOAT64 = "float64"
    FLOAT32 = "float32"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.value)
