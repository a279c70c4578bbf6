"""
Stacked LSTM benchmark without external memory.

Layer 0 reads the input embedding, layer k > 0 reads the hidden output of
layer k-1, and ``o_t = tanh(W_o h_top + b_o)``. Every layer owns a
trainable initial hidden state.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .lstm import LstmCache, LstmParameters, lstm_cell, lstm_cell_backward


@dataclass(frozen=True, eq=False)
class DeepLstmState:
    layers: Tuple[Tuple[np.ndarray, np.ndarray], ...]

    @property
    def top(self) -> np.ndarray:
        return self.layers[-1][0]


@dataclass(frozen=True, eq=False)
class DeepLstmAdjoint:
    layers: Tuple[Tuple[np.ndarray, np.ndarray], ...]


@dataclass(frozen=True, eq=False)
class DeepLstmCache:
    lstm: Tuple[LstmCache, ...]
    h_top: np.ndarray
    o: np.ndarray


def _layer(model, k: int) -> LstmParameters:
    return LstmParameters(model.params[f"lstm.{k}.W"], model.params[f"lstm.{k}.b"])


def initial_state(model) -> DeepLstmState:
    config = model.config
    return DeepLstmState(tuple(
        (model.params[f"lstm.{k}.h0"].copy(), np.zeros(config.hidden, dtype=config.dtype))
        for k in range(config.layers)
    ))


def zero_adjoint(state: DeepLstmState) -> DeepLstmAdjoint:
    return DeepLstmAdjoint(tuple(
        (np.zeros(h.shape), np.zeros(c.shape)) for h, c in state.layers
    ))


def deep_lstm_step(model, state: DeepLstmState, i_t: np.ndarray):
    """
    One step through all layers.

    Returns:
        (next state, o_t, DeepLstmCache)
    """
    x = i_t
    layers: List[Tuple[np.ndarray, np.ndarray]] = []
    caches: List[LstmCache] = []
    for k, layer_state in enumerate(state.layers):
        new_state, x, cache = lstm_cell(_layer(model, k), layer_state, x)
        layers.append(new_state)
        caches.append(cache)
    o = np.tanh(model.params["output.W_o"] @ x + model.params["output.b_o"])
    return DeepLstmState(tuple(layers)), o, DeepLstmCache(tuple(caches), x, o)


def deep_lstm_step_backward(model, cache: DeepLstmCache, d_o: np.ndarray,
                            d_next: DeepLstmAdjoint, grads) -> Tuple[np.ndarray, DeepLstmAdjoint]:
    """Backpropagate one step; returns (dL/d i_t, dL/d previous state)."""
    d_pre_o = d_o * (1.0 - cache.o ** 2)
    grads["output.W_o"] += np.outer(d_pre_o, cache.h_top)
    grads["output.b_o"] += d_pre_o
    d_from_above = model.params["output.W_o"].T @ d_pre_o

    d_prev: List[Tuple[np.ndarray, np.ndarray]] = [None] * len(cache.lstm)
    for k in reversed(range(len(cache.lstm))):
        dh_next, dc_next = d_next.layers[k]
        g = lstm_cell_backward(_layer(model, k), cache.lstm[k], dh_next + d_from_above, dc_next)
        grads[f"lstm.{k}.W"] += g.dW
        grads[f"lstm.{k}.b"] += g.db
        d_prev[k] = (g.dh_prev, g.dc_prev)
        d_from_above = g.dx
    return d_from_above, DeepLstmAdjoint(tuple(d_prev))


def finish_backward(model, d_initial: DeepLstmAdjoint, grads) -> None:
    for k, (dh, _) in enumerate(d_initial.layers):
        grads[f"lstm.{k}.h0"] += dh
