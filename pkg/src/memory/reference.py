"""
Discrete stack, queue and deque used as the limit oracle.

With every pop and push signal in {0, 1} the continuous structures must
behave exactly like these.
"""

from collections import deque
from typing import List, Optional, Sequence

import numpy as np

from core.types import MemoryKind

from .dynamics import memory_step
from .state import MemorySignals, empty_state


class DiscreteStack:
    def __init__(self, width: int):
        self.width = width
        self.items: List[np.ndarray] = []

    def step(self, signals: MemorySignals) -> np.ndarray:
        if signals.pop and self.items:
            self.items.pop()
        if signals.push:
            self.items.append(np.asarray(signals.value))
        return self.items[-1] if self.items else np.zeros(self.width)


class DiscreteQueue:
    def __init__(self, width: int):
        self.width = width
        self.items = deque()

    def step(self, signals: MemorySignals) -> np.ndarray:
        if signals.pop and self.items:
            self.items.popleft()
        if signals.push:
            self.items.append(np.asarray(signals.value))
        return self.items[0] if self.items else np.zeros(self.width)


class DiscreteDeque:
    def __init__(self, width: int):
        self.width = width
        self.items = deque()

    def step(self, signals: MemorySignals):
        if signals.pop and self.items:
            self.items.pop()
        if signals.pop_bot and self.items:
            self.items.popleft()
        if signals.push_bot:
            self.items.appendleft(np.asarray(signals.value_bot))
        if signals.push:
            self.items.append(np.asarray(signals.value))
        if not self.items:
            return np.zeros(self.width), np.zeros(self.width)
        return self.items[-1], self.items[0]


_DISCRETE = {
    MemoryKind.STACK: DiscreteStack,
    MemoryKind.QUEUE: DiscreteQueue,
    MemoryKind.DEQUE: DiscreteDeque,
}


def discrete_reference(kind: MemoryKind, width: int):
    """Fresh discrete structure of the given kind."""
    return _DISCRETE[MemoryKind(kind)](width)


def random_binary_signals(kind: MemoryKind, steps: int, width: int,
                          rng: np.random.Generator) -> List[MemorySignals]:
    """Random signal sequence with every pop/push in {0, 1}."""
    kind = MemoryKind(kind)
    sequence = []
    for _ in range(steps):
        bits = rng.integers(0, 2, size=4)
        if kind is MemoryKind.DEQUE:
            sequence.append(MemorySignals(
                value=rng.standard_normal(width), pop=float(bits[0]), push=float(bits[1]),
                value_bot=rng.standard_normal(width), pop_bot=float(bits[2]), push_bot=float(bits[3])))
        else:
            sequence.append(MemorySignals(
                value=rng.standard_normal(width), pop=float(bits[0]), push=float(bits[1])))
    return sequence


def discrete_limit_mismatch(kind: MemoryKind, signals: Sequence[MemorySignals],
                            width: Optional[int] = None) -> float:
    """
    Largest absolute difference between continuous and discrete reads.

    Args:
        kind: structure to compare
        signals: binary signal sequence
        width: value width (taken from the first signal when omitted)

    Returns:
        max over steps and read ends of |continuous - discrete|
    """
    kind = MemoryKind(kind)
    if not signals:
        return 0.0
    width = width or np.asarray(signals[0].value).shape[0]
    state = empty_state(kind, width)
    oracle = discrete_reference(kind, width)
    worst = 0.0
    for sig in signals:
        state, result = memory_step(state, sig)
        expected = oracle.step(sig)
        if kind is MemoryKind.DEQUE:
            worst = max(worst,
                        float(np.max(np.abs(result.read - expected[0]))),
                        float(np.max(np.abs(result.read_bot - expected[1]))))
        else:
            worst = max(worst, float(np.max(np.abs(result.read - expected))))
    return worst
