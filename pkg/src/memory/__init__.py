"""
Memory Module

Differentiable stack, queue and deque: immutable states, forward steps,
exact backward steps and a discrete reference for the binary-signal limit.
"""

from core.types import MemoryKind

from .dynamics import (
    deque_step, memory_step, memory_step_backward, queue_deque_step_backward,
    queue_step, stack_step, stack_step_backward, step_tie_margin,
)
from .reference import discrete_limit_mismatch, discrete_reference, random_binary_signals
from .state import (
    MemoryAdjoints, MemorySignals, MemoryState, MemoryUpstream, ReadResult, empty_state,
)

__all__ = [
    'MemoryKind',
    'MemoryState', 'MemorySignals', 'ReadResult', 'MemoryUpstream', 'MemoryAdjoints',
    'empty_state',
    'stack_step', 'queue_step', 'deque_step', 'memory_step',
    'stack_step_backward', 'queue_deque_step_backward', 'memory_step_backward',
    'step_tie_margin',
    'discrete_reference', 'discrete_limit_mismatch', 'random_binary_signals',
]
