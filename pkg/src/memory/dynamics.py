"""
Forward and backward dynamics of the continuous stack, queue and deque.

A step pops, pushes one new row per end, then reads. The three structures
differ only in which end each of those happens at, captured by a layout:

    stack: pop top,              push top,             read top
    queue: pop bottom,           push top,             read bottom
    deque: pop top then bottom,  push bottom and top,  read top and bottom

Values are stored bottom first; kernels see strengths from the end they
work on.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.exceptions import DimensionError, NumericInputError
from core.types import MemoryKind

from . import kernels
from .state import (
    MemoryAdjoints, MemorySignals, MemoryState, MemoryUpstream, ReadResult,
)

TOP = "top"
BOTTOM = "bottom"


@dataclass(frozen=True)
class _Layout:
    pop_ends: Tuple[str, ...]
    push_bottom: bool
    read_ends: Tuple[str, ...]


_LAYOUTS = {
    MemoryKind.STACK: _Layout((TOP,), False, (TOP,)),
    MemoryKind.QUEUE: _Layout((BOTTOM,), False, (BOTTOM,)),
    MemoryKind.DEQUE: _Layout((TOP, BOTTOM), True, (TOP, BOTTOM)),
}


def _facing(x: np.ndarray, end: str) -> np.ndarray:
    """View of ``x`` ordered from ``end`` inwards (involution)."""
    return x[::-1] if end == TOP else x


def _pop_amounts(layout: _Layout, signals: MemorySignals) -> List[float]:
    if layout.push_bottom:
        return [signals.pop, signals.pop_bot]
    return [signals.pop]


def _check_scalar(name: str, value) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise NumericInputError(f"signal '{name}' is not finite: {value}", signal=name)
    if not 0.0 <= value <= 1.0:
        raise NumericInputError(f"signal '{name}' must lie in [0, 1], got {value}", signal=name)
    return value


def _check_value(name: str, value, state: MemoryState) -> np.ndarray:
    value = np.asarray(value, dtype=state.dtype)
    if value.shape != (state.embedding_width,):
        raise DimensionError(
            f"signal '{name}' has shape {value.shape}, memory width is {state.embedding_width}",
            signal=name)
    if not np.all(np.isfinite(value)):
        raise NumericInputError(f"signal '{name}' contains non-finite entries", signal=name)
    return value


def _validate(state: MemoryState, signals: MemorySignals, kind: MemoryKind) -> MemorySignals:
    if state.kind is not kind:
        raise DimensionError(f"{kind.value} step applied to a {state.kind.value} state")
    needs_bottom = _LAYOUTS[kind].push_bottom
    if needs_bottom and not signals.has_bottom:
        raise DimensionError("deque steps need bottom value, pop and push signals")
    if not needs_bottom and signals.has_bottom:
        raise DimensionError(f"{kind.value} steps take no bottom signals")
    checked = dict(
        value=_check_value("value", signals.value, state),
        pop=_check_scalar("pop", signals.pop),
        push=_check_scalar("push", signals.push),
    )
    if needs_bottom:
        checked.update(
            value_bot=_check_value("value_bot", signals.value_bot, state),
            pop_bot=_check_scalar("pop_bot", signals.pop_bot),
            push_bot=_check_scalar("push_bot", signals.push_bot),
        )
    return MemorySignals(**checked)


def _popped_strengths(layout: _Layout, strengths: np.ndarray, signals: MemorySignals) -> List[np.ndarray]:
    """Strengths before each pop followed by the final popped strengths."""
    stages = [strengths]
    for end, amount in zip(layout.pop_ends, _pop_amounts(layout, signals)):
        current = stages[-1]
        stages.append(_facing(kernels.pop(_facing(current, end), amount), end))
    return stages


def _pushed(layout: _Layout, popped: np.ndarray, signals: MemorySignals, dtype) -> np.ndarray:
    if layout.push_bottom:
        strengths = np.empty(popped.size + 2, dtype=dtype)
        strengths[0] = signals.push_bot
        strengths[1:-1] = popped
    else:
        strengths = np.empty(popped.size + 1, dtype=dtype)
        strengths[:-1] = popped
    strengths[-1] = signals.push
    return strengths


def _step(state: MemoryState, signals: MemorySignals, kind: MemoryKind) -> Tuple[MemoryState, ReadResult]:
    signals = _validate(state, signals, kind)
    layout = _LAYOUTS[kind]
    popped = _popped_strengths(layout, state.strengths, signals)[-1]

    strengths = _pushed(layout, popped, signals, state.dtype)
    if layout.push_bottom:
        new_state = state.extended(strengths, bottom=signals.value_bot, top=signals.value)
    else:
        new_state = state.extended(strengths, top=signals.value)

    values = new_state.values
    reads = []
    for end in layout.read_ends:
        weights = _facing(kernels.read_weights(_facing(strengths, end)), end)
        reads.append((weights @ values, weights))

    if len(reads) == 2:
        result = ReadResult(reads[0][0], reads[0][1], read_bot=reads[1][0], weights_bot=reads[1][1])
    else:
        result = ReadResult(reads[0][0], reads[0][1])
    return new_state, result


def stack_step(state: MemoryState, signals: MemorySignals) -> Tuple[MemoryState, ReadResult]:
    """Pop from the top, push ``value`` with strength ``push``, read from the top."""
    return _step(state, signals, MemoryKind.STACK)


def queue_step(state: MemoryState, signals: MemorySignals) -> Tuple[MemoryState, ReadResult]:
    """Dequeue from the front (bottom), enqueue at the back (top), read the front."""
    return _step(state, signals, MemoryKind.QUEUE)


def deque_step(state: MemoryState, signals: MemorySignals) -> Tuple[MemoryState, ReadResult]:
    """Pop the top then the bottom, push at both ends, read both ends."""
    return _step(state, signals, MemoryKind.DEQUE)


_STEPS = {
    MemoryKind.STACK: stack_step,
    MemoryKind.QUEUE: queue_step,
    MemoryKind.DEQUE: deque_step,
}


def memory_step(state: MemoryState, signals: MemorySignals) -> Tuple[MemoryState, ReadResult]:
    """Dispatch on the state's kind."""
    return _STEPS[state.kind](state, signals)


def _upstream_parts(upstream: MemoryUpstream, new_state: MemoryState, kind: MemoryKind):
    rows, width = new_state.rows, new_state.embedding_width
    d_values = np.zeros((rows, width)) if upstream.d_values is None else np.asarray(upstream.d_values)
    d_strengths = np.zeros(rows) if upstream.d_strengths is None else np.asarray(upstream.d_strengths)
    if d_values.shape != (rows, width) or d_strengths.shape != (rows,):
        raise DimensionError(
            f"upstream adjoints {d_values.shape}/{d_strengths.shape} do not match a state "
            f"with {rows} rows of width {width}")
    d_reads = [np.asarray(upstream.d_read)]
    if _LAYOUTS[kind].push_bottom:
        d_bot = np.zeros(width) if upstream.d_read_bot is None else np.asarray(upstream.d_read_bot)
        d_reads.append(d_bot)
    for d_read in d_reads:
        if d_read.shape != (width,):
            raise DimensionError(f"read adjoint has shape {d_read.shape}, expected ({width},)")
    return d_values, d_strengths, d_reads


def _step_backward(prev_state: MemoryState, signals: MemorySignals, new_state: MemoryState,
                   upstream: MemoryUpstream, kind: MemoryKind) -> MemoryAdjoints:
    signals = _validate(prev_state, signals, kind)
    layout = _LAYOUTS[kind]
    added = 2 if layout.push_bottom else 1
    if new_state.kind is not kind or new_state.rows != prev_state.rows + added:
        raise DimensionError(
            f"new state has {new_state.rows} rows; a {kind.value} step from "
            f"{prev_state.rows} rows produces {prev_state.rows + added}")

    d_values, d_strengths, d_reads = _upstream_parts(upstream, new_state, kind)
    d_values = d_values.astype(np.float64, copy=True)
    d_strengths = d_strengths.astype(np.float64, copy=True)

    strengths = new_state.strengths
    values = new_state.values
    for end, d_read in zip(layout.read_ends, d_reads):
        weights = _facing(kernels.read_weights(_facing(strengths, end)), end)
        d_values += np.outer(weights, d_read)
        d_weights = values @ d_read
        d_strengths += _facing(
            kernels.read_weights_backward(_facing(strengths, end), _facing(d_weights, end)), end)

    if layout.push_bottom:
        d_push_bot, d_value_bot = float(d_strengths[0]), d_values[0].copy()
        d_popped, d_prev_values = d_strengths[1:-1], d_values[1:-1]
    else:
        d_push_bot = d_value_bot = None
        d_popped, d_prev_values = d_strengths[:-1], d_values[:-1]
    d_push, d_value = float(d_strengths[-1]), d_values[-1].copy()

    stages = _popped_strengths(layout, prev_state.strengths, signals)
    amounts = _pop_amounts(layout, signals)
    d_amounts = [0.0] * len(amounts)
    d_stage = d_popped
    for k in reversed(range(len(layout.pop_ends))):
        end = layout.pop_ends[k]
        d_before, d_amounts[k] = kernels.pop_backward(
            _facing(stages[k], end), amounts[k], _facing(d_stage, end))
        d_stage = _facing(d_before, end)

    return MemoryAdjoints(
        d_values=np.ascontiguousarray(d_prev_values),
        d_strengths=np.ascontiguousarray(d_stage),
        d_value=d_value,
        d_pop=d_amounts[0],
        d_push=d_push,
        d_value_bot=d_value_bot,
        d_pop_bot=d_amounts[1] if layout.push_bottom else None,
        d_push_bot=d_push_bot,
    )


def stack_step_backward(prev_state: MemoryState, signals: MemorySignals, new_state: MemoryState,
                        read: Optional[ReadResult], upstream: MemoryUpstream) -> MemoryAdjoints:
    """
    Exact adjoints of ``stack_step``.

    Args:
        prev_state: state the forward step started from
        signals: signals the forward step consumed
        new_state: state the forward step returned
        read: read the forward step returned (unused beyond bookkeeping; the
            weights are recomputed from ``new_state``)
        upstream: dL/d read, dL/d new values, dL/d new strengths

    Returns:
        MemoryAdjoints for the previous state and the signals
    """
    return _step_backward(prev_state, signals, new_state, upstream, MemoryKind.STACK)


def queue_deque_step_backward(prev_state: MemoryState, signals: MemorySignals, new_state: MemoryState,
                              read: Optional[ReadResult], upstream: MemoryUpstream) -> MemoryAdjoints:
    """Exact adjoints of ``queue_step`` or ``deque_step`` (chosen by the state's kind)."""
    kind = prev_state.kind
    if kind is MemoryKind.STACK:
        raise DimensionError("stack states are differentiated by stack_step_backward")
    return _step_backward(prev_state, signals, new_state, upstream, kind)


def memory_step_backward(prev_state: MemoryState, signals: MemorySignals, new_state: MemoryState,
                         read: Optional[ReadResult], upstream: MemoryUpstream) -> MemoryAdjoints:
    """Dispatch on the state's kind."""
    if prev_state.kind is MemoryKind.STACK:
        return stack_step_backward(prev_state, signals, new_state, read, upstream)
    return queue_deque_step_backward(prev_state, signals, new_state, read, upstream)


def step_tie_margin(prev_state: MemoryState, signals: MemorySignals) -> float:
    """Smallest distance of this step's min/max arguments to a switching point."""
    layout = _LAYOUTS[prev_state.kind]
    stages = _popped_strengths(layout, prev_state.strengths, signals)
    margins = [
        kernels.pop_tie_margin(_facing(stages[k], end), amount)
        for k, (end, amount) in enumerate(zip(layout.pop_ends, _pop_amounts(layout, signals)))
    ]
    strengths = _pushed(layout, stages[-1], signals, prev_state.dtype)
    margins.extend(kernels.read_tie_margin(_facing(strengths, end)) for end in layout.read_ends)
    return min(margins)
