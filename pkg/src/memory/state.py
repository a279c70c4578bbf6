"""
Memory state, control signals, reads and adjoints.

All values here are immutable: a memory step consumes a state and returns a
new one, so states can be kept in a trace and shared across threads.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core.exceptions import DimensionError
from core.types import MemoryKind

from .buffer import ValueBuffer


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class MemoryState:
    """
    Values and strengths of a continuous stack, queue or deque.

    Row 0 is the bottom (oldest) row. ``values`` has shape (rows, width) and
    ``strengths`` shape (rows,). Use ``empty_state`` or ``from_arrays`` to
    build one.
    """
    kind: MemoryKind
    embedding_width: int
    buffer: ValueBuffer = field(repr=False)
    start: int
    stop: int
    strengths: np.ndarray

    @classmethod
    def from_arrays(cls, kind: MemoryKind, values: np.ndarray, strengths: np.ndarray) -> "MemoryState":
        """Build a state from explicit arrays (copied)."""
        values = np.asarray(values)
        strengths = np.array(strengths, dtype=values.dtype, copy=True)
        if values.ndim != 2 or strengths.shape != (values.shape[0],):
            raise DimensionError(
                f"values {values.shape} and strengths {strengths.shape} do not describe the same rows")
        if kind is MemoryKind.DEQUE and values.shape[0] % 2:
            raise DimensionError(f"deque states hold an even number of rows, got {values.shape[0]}")
        buffer = ValueBuffer(values.shape[1], values.dtype, rows=values)
        start, stop = buffer.extent
        return cls(MemoryKind(kind), values.shape[1], buffer, start, stop, _frozen(strengths))

    @property
    def values(self) -> np.ndarray:
        return self.buffer.view(self.start, self.stop)

    @property
    def rows(self) -> int:
        return self.stop - self.start

    @property
    def steps(self) -> int:
        """Number of steps that produced this state."""
        return self.rows // 2 if self.kind is MemoryKind.DEQUE else self.rows

    @property
    def dtype(self):
        return self.buffer.dtype

    def extended(self, strengths: np.ndarray, bottom: Optional[np.ndarray] = None,
                 top: Optional[np.ndarray] = None) -> "MemoryState":
        """New state with rows added at either end and the given strengths."""
        buffer, start, stop = self.buffer.extend(self.start, self.stop, bottom=bottom, top=top)
        return MemoryState(self.kind, self.embedding_width, buffer, start, stop, _frozen(strengths))


def empty_state(kind: MemoryKind, embedding_width: int, dtype=np.float64) -> MemoryState:
    """The zero-row state every sequence starts from."""
    if embedding_width < 1:
        raise DimensionError(f"embedding width must be positive, got {embedding_width}")
    return MemoryState.from_arrays(
        MemoryKind(kind),
        np.zeros((0, embedding_width), dtype=dtype),
        np.zeros(0, dtype=dtype),
    )


@dataclass(frozen=True)
class MemorySignals:
    """
    Controller signals for one step.

    For a deque ``value``/``pop``/``push`` address the top end and the
    ``*_bot`` fields the bottom end; stacks and queues leave those unset.
    """
    value: np.ndarray
    pop: float
    push: float
    value_bot: Optional[np.ndarray] = None
    pop_bot: Optional[float] = None
    push_bot: Optional[float] = None

    @property
    def value_top(self) -> np.ndarray:
        return self.value

    @property
    def pop_top(self) -> float:
        return self.pop

    @property
    def push_top(self) -> float:
        return self.push

    @property
    def has_bottom(self) -> bool:
        return self.value_bot is not None


@dataclass(frozen=True, eq=False)
class ReadResult:
    """
    Read vector(s) and the row weights that produced them.

    ``read`` is the stack top read, the queue front read, or the deque top
    read; ``read_bot`` is the deque bottom read.
    """
    read: np.ndarray
    weights: np.ndarray
    read_bot: Optional[np.ndarray] = None
    weights_bot: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class MemoryUpstream:
    """Adjoints flowing into a step from the loss: dL/dr and dL/d(new state)."""
    d_read: np.ndarray
    d_values: Optional[np.ndarray] = None
    d_strengths: Optional[np.ndarray] = None
    d_read_bot: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class MemoryAdjoints:
    """Adjoints of one step's inputs: the previous state and the signals."""
    d_values: np.ndarray
    d_strengths: np.ndarray
    d_value: np.ndarray
    d_pop: float
    d_push: float
    d_value_bot: Optional[np.ndarray] = None
    d_pop_bot: Optional[float] = None
    d_push_bot: Optional[float] = None
