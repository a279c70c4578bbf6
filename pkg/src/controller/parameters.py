"""
Parameter layout, initialization and counting.

Parameters are named ``<group>.<...>``:

    embedding.input                 input symbol embeddings
    lstm.<k>.W / .b / .h0           LSTM layer k (gates i, f, o, g stacked)
    memory.W_d / W_u / W_v (+ b_*)  push, pop and value projections
    memory.*_bot                    deque bottom-end projections
    output.W_o / .b_o               tanh output projection
    output.W_softmax / .b_softmax   softmax layer over EOS + target symbols
"""

from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from config.schema import ModelConfig
from core.exceptions import DimensionError
from core.types import MemoryKind

GROUPS = OrderedDict([
    ("embedding", "embeddings"),
    ("lstm", "recurrent_core"),
    ("memory", "memory_interface"),
    ("output", "output_layer"),
])

# Gate order inside lstm.<k>.W rows.
GATES = ("input", "forget", "output", "candidate")

FORGET_BIAS = 1.0
POP_BIAS = -1.0


class ParameterSet:
    """Ordered name -> array mapping used for parameters, gradients and optimizer state."""

    def __init__(self, arrays: Optional[Mapping[str, np.ndarray]] = None):
        self._arrays: "OrderedDict[str, np.ndarray]" = OrderedDict(arrays or {})

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __setitem__(self, name: str, value: np.ndarray):
        self._arrays[name] = value

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __iter__(self) -> Iterator[str]:
        return iter(self._arrays)

    def __len__(self) -> int:
        return len(self._arrays)

    def names(self):
        return list(self._arrays)

    def items(self):
        return self._arrays.items()

    @property
    def size(self) -> int:
        """Total number of scalars."""
        return int(sum(a.size for a in self._arrays.values()))

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "ParameterSet":
        return ParameterSet((name, fn(a)) for name, a in self._arrays.items())

    def copy(self) -> "ParameterSet":
        return self.map(np.copy)

    def zeros_like(self) -> "ParameterSet":
        return self.map(np.zeros_like)

    def add_(self, other: "ParameterSet") -> "ParameterSet":
        """In-place elementwise sum; returns self."""
        self._check_same_layout(other)
        for name, a in self._arrays.items():
            a += other[name]
        return self

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self._arrays.values())

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(a))) for a in self._arrays.values() if a.size), default=0.0)

    def _check_same_layout(self, other: "ParameterSet"):
        if list(other) != list(self) or any(other[n].shape != a.shape for n, a in self._arrays.items()):
            raise DimensionError("parameter sets have different layouts")


def group_of(name: str) -> str:
    return GROUPS[name.split(".", 1)[0]]


def parameter_shapes(config: ModelConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    """Name -> shape for every trainable array of ``config``."""
    H, m, E = config.hidden, config.memory_width, config.embedding
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    shapes["embedding.input"] = (config.input_rows, E)

    for k in range(config.layers):
        width = (E + config.read_count * m) if k == 0 else H
        shapes[f"lstm.{k}.W"] = (4 * H, width + H)
        shapes[f"lstm.{k}.b"] = (4 * H,)
        shapes[f"lstm.{k}.h0"] = (H,)

    if config.memory_kind is not None:
        suffixes = ("", "_bot") if config.memory_kind is MemoryKind.DEQUE else ("",)
        for suffix in suffixes:
            shapes[f"memory.W_d{suffix}"] = (1, H)
            shapes[f"memory.b_d{suffix}"] = (1,)
            shapes[f"memory.W_u{suffix}"] = (1, H)
            shapes[f"memory.b_u{suffix}"] = (1,)
            shapes[f"memory.W_v{suffix}"] = (m, H)
            shapes[f"memory.b_v{suffix}"] = (m,)

    shapes["output.W_o"] = (H, H)
    shapes["output.b_o"] = (H,)
    shapes["output.W_softmax"] = (config.output_classes, H)
    shapes["output.b_softmax"] = (config.output_classes,)
    return shapes


def _is_bias(name: str) -> bool:
    return name.rsplit(".", 1)[-1].startswith("b")


def init_parameters(config: ModelConfig, seed: int) -> ParameterSet:
    """
    Initialize every trainable array.

    Weights, embeddings and initial hidden states are uniform in
    [-init_scale, init_scale]; biases are zero except the LSTM forget gate
    (+1) and the pop projections (-1).

    Args:
        config: model architecture
        seed: seed for the numpy generator

    Returns:
        ParameterSet in ``parameter_shapes`` order
    """
    rng = np.random.default_rng(seed)
    dtype = config.dtype
    params = ParameterSet()
    for name, shape in parameter_shapes(config).items():
        if _is_bias(name):
            array = np.zeros(shape, dtype=dtype)
            if name.startswith("lstm."):
                H = config.hidden
                array[H:2 * H] = FORGET_BIAS
            elif name.startswith("memory.b_u"):
                array[:] = POP_BIAS
        else:
            array = rng.uniform(-config.init_scale, config.init_scale, size=shape).astype(dtype)
        params[name] = array
    return params


@dataclass(frozen=True)
class ParameterCount:
    """
    Trainable scalar counts.

    ``total`` counts everything; ``core_total`` counts the recurrent core and
    memory interface only, the scope parameter tables for these models are
    usually reported in.
    """
    breakdown: Dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.breakdown.values())

    @property
    def core_total(self) -> int:
        return self.breakdown["recurrent_core"] + self.breakdown["memory_interface"]

    def __int__(self) -> int:
        return self.total

    def as_dict(self) -> Dict[str, int]:
        return {**self.breakdown, "total": self.total, "core_total": self.core_total}


def count_parameters(config: ModelConfig) -> ParameterCount:
    """Exact trainable scalar count of ``config`` with a per-group breakdown."""
    breakdown = {group: 0 for group in GROUPS.values()}
    for name, shape in parameter_shapes(config).items():
        breakdown[group_of(name)] += int(np.prod(shape))
    return ParameterCount(breakdown)
