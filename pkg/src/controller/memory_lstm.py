"""
LSTM controller coupled to a stack, queue or deque.

Each step feeds ``[i_t, r_{t-1}]`` (deque: ``[i_t, r_top, r_bot]``) through
the LSTM; its hidden output h drives

    d = sigmoid(W_d h + b_d)   push strength
    u = sigmoid(W_u h + b_u)   pop strength
    v = tanh(W_v h + b_v)      value
    o = tanh(W_o h + b_o)      output

and the memory step's read becomes next step's extra input. The initial
hidden state is trainable; the initial cell, reads and memory are zero.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import expit

from core.exceptions import DimensionError
from core.types import MemoryKind
from memory import (
    MemorySignals, MemoryState, MemoryUpstream, ReadResult, empty_state, memory_step,
    memory_step_backward,
)

from .lstm import LstmCache, LstmParameters, lstm_cell, lstm_cell_backward


@dataclass(frozen=True, eq=False)
class RecurrentState:
    """Controller state H_t: LSTM (h, c), previous read(s), memory."""
    h: np.ndarray
    c: np.ndarray
    reads: Tuple[np.ndarray, ...]
    memory: MemoryState


@dataclass(frozen=True, eq=False)
class RecurrentAdjoint:
    """dL/dH_t, shaped like RecurrentState."""
    dh: np.ndarray
    dc: np.ndarray
    d_reads: Tuple[np.ndarray, ...]
    d_values: np.ndarray
    d_strengths: np.ndarray


@dataclass(frozen=True, eq=False)
class ControllerCache:
    """Activations of one controller step kept for its backward."""
    lstm: LstmCache
    h: np.ndarray
    o: np.ndarray
    signals: MemorySignals
    prev_memory: MemoryState
    new_memory: MemoryState
    read: ReadResult


def _suffixes(model) -> Tuple[str, ...]:
    return ("", "_bot") if model.config.memory_kind is MemoryKind.DEQUE else ("",)


def _lstm_params(model) -> LstmParameters:
    return LstmParameters(model.params["lstm.0.W"], model.params["lstm.0.b"])


def initial_state(model) -> RecurrentState:
    """H_0 with the trainable initial hidden state and everything else zero."""
    config = model.config
    if config.memory_kind is None:
        raise DimensionError(f"{config.kind.value} has no memory controller")
    dtype = config.dtype
    zeros = np.zeros(config.memory_width, dtype=dtype)
    return RecurrentState(
        h=model.params["lstm.0.h0"].copy(),
        c=np.zeros(config.hidden, dtype=dtype),
        reads=tuple(zeros.copy() for _ in range(config.read_count)),
        memory=empty_state(config.memory_kind, config.memory_width, dtype),
    )


def zero_adjoint(state: RecurrentState) -> RecurrentAdjoint:
    """Adjoint of a final state the loss does not depend on."""
    return RecurrentAdjoint(
        dh=np.zeros_like(state.h, dtype=np.float64),
        dc=np.zeros_like(state.c, dtype=np.float64),
        d_reads=tuple(np.zeros_like(r, dtype=np.float64) for r in state.reads),
        d_values=np.zeros((state.memory.rows, state.memory.embedding_width)),
        d_strengths=np.zeros(state.memory.rows),
    )


def controller_step(model, state: RecurrentState, i_t: np.ndarray):
    """
    Advance the controller and its memory by one symbol.

    Args:
        model: object with ``config`` (ModelConfig) and ``params`` (ParameterSet)
        state: H_{t-1}
        i_t: input embedding of the current symbol

    Returns:
        (H_t, o_t, ControllerCache)
    """
    params = model.params
    x = np.concatenate([i_t, *state.reads])
    (h, c), _, lstm_cache = lstm_cell(_lstm_params(model), (state.h, state.c), x)

    controls = {}
    for suffix in _suffixes(model):
        controls[f"d{suffix}"] = float(expit(params[f"memory.W_d{suffix}"] @ h + params[f"memory.b_d{suffix}"])[0])
        controls[f"u{suffix}"] = float(expit(params[f"memory.W_u{suffix}"] @ h + params[f"memory.b_u{suffix}"])[0])
        controls[f"v{suffix}"] = np.tanh(params[f"memory.W_v{suffix}"] @ h + params[f"memory.b_v{suffix}"])
    o = np.tanh(params["output.W_o"] @ h + params["output.b_o"])

    signals = MemorySignals(
        value=controls["v"], pop=controls["u"], push=controls["d"],
        value_bot=controls.get("v_bot"), pop_bot=controls.get("u_bot"), push_bot=controls.get("d_bot"),
    )
    new_memory, read = memory_step(state.memory, signals)
    reads = (read.read,) if read.read_bot is None else (read.read, read.read_bot)

    new_state = RecurrentState(h=h, c=c, reads=reads, memory=new_memory)
    cache = ControllerCache(lstm_cache, h, o, signals, state.memory, new_memory, read)
    return new_state, o, cache


def controller_step_backward(model, cache: ControllerCache, d_o: np.ndarray,
                             d_next: RecurrentAdjoint, grads) -> Tuple[np.ndarray, RecurrentAdjoint]:
    """
    Backpropagate one controller step.

    Args:
        model: the model the forward step ran with
        cache: the forward step's cache
        d_o: dL/d o_t
        d_next: dL/dH_t
        grads: ParameterSet accumulating parameter gradients (updated in place)

    Returns:
        (dL/d i_t, dL/dH_{t-1})
    """
    params = model.params
    h = cache.h
    upstream = MemoryUpstream(
        d_read=d_next.d_reads[0],
        d_values=d_next.d_values,
        d_strengths=d_next.d_strengths,
        d_read_bot=d_next.d_reads[1] if len(d_next.d_reads) > 1 else None,
    )
    adj = memory_step_backward(cache.prev_memory, cache.signals, cache.new_memory, cache.read, upstream)

    dh = d_next.dh.astype(np.float64, copy=True)
    sig = cache.signals
    per_end = [("", sig.push, sig.pop, sig.value, adj.d_push, adj.d_pop, adj.d_value)]
    if sig.has_bottom:
        per_end.append(("_bot", sig.push_bot, sig.pop_bot, sig.value_bot,
                        adj.d_push_bot, adj.d_pop_bot, adj.d_value_bot))
    for suffix, d, u, v, d_d, d_u, d_v in per_end:
        for name, act, d_act in (("d", d, d_d), ("u", u, d_u)):
            d_pre = d_act * act * (1.0 - act)
            grads[f"memory.W_{name}{suffix}"] += d_pre * h[None, :]
            grads[f"memory.b_{name}{suffix}"] += d_pre
            dh += d_pre * params[f"memory.W_{name}{suffix}"][0]
        d_pre_v = d_v * (1.0 - v ** 2)
        grads[f"memory.W_v{suffix}"] += np.outer(d_pre_v, h)
        grads[f"memory.b_v{suffix}"] += d_pre_v
        dh += params[f"memory.W_v{suffix}"].T @ d_pre_v

    d_pre_o = d_o * (1.0 - cache.o ** 2)
    grads["output.W_o"] += np.outer(d_pre_o, h)
    grads["output.b_o"] += d_pre_o
    dh += params["output.W_o"].T @ d_pre_o

    lstm_grads = lstm_cell_backward(_lstm_params(model), cache.lstm, dh, d_next.dc)
    grads["lstm.0.W"] += lstm_grads.dW
    grads["lstm.0.b"] += lstm_grads.db

    E = model.config.embedding
    m = model.config.memory_width
    dx = lstm_grads.dx
    d_reads = tuple(dx[E + k * m:E + (k + 1) * m] for k in range(model.config.read_count))
    d_prev = RecurrentAdjoint(
        dh=lstm_grads.dh_prev,
        dc=lstm_grads.dc_prev,
        d_reads=d_reads,
        d_values=adj.d_values,
        d_strengths=adj.d_strengths,
    )
    return dx[:E], d_prev


def finish_backward(model, d_initial: RecurrentAdjoint, grads) -> None:
    """Route dL/dH_0 into the trainable initial hidden state."""
    grads["lstm.0.h0"] += d_initial.dh

