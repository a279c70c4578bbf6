"""
LSTM cell forward and backward.

Gate pre-activations are ``W @ [x, h_prev] + b`` with rows stacked as
input, forget, output, candidate.
"""

from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np
from scipy.special import expit

from core.exceptions import DimensionError


@dataclass(frozen=True, eq=False)
class LstmParameters:
    W: np.ndarray
    b: np.ndarray

    @property
    def hidden(self) -> int:
        return self.b.shape[0] // 4

    @property
    def input_width(self) -> int:
        return self.W.shape[1] - self.hidden


@dataclass(frozen=True, eq=False)
class LstmCache:
    z: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c_prev: np.ndarray
    tanh_c: np.ndarray


class LstmOutput(NamedTuple):
    state: Tuple[np.ndarray, np.ndarray]
    output: np.ndarray
    cache: LstmCache


class LstmGradients(NamedTuple):
    dx: np.ndarray
    dh_prev: np.ndarray
    dc_prev: np.ndarray
    dW: np.ndarray
    db: np.ndarray


def lstm_cell(params: LstmParameters, state: Tuple[np.ndarray, np.ndarray], x: np.ndarray) -> LstmOutput:
    """
    One LSTM step.

    Args:
        params: layer weights
        state: (h_prev, c_prev)
        x: input vector

    Returns:
        LstmOutput(((h, c)), h, cache)
    """
    h_prev, c_prev = state
    H = params.hidden
    if x.shape != (params.input_width,) or h_prev.shape != (H,) or c_prev.shape != (H,):
        raise DimensionError(
            f"lstm layer expects input {params.input_width} and state {H}, "
            f"got {x.shape}, {h_prev.shape}, {c_prev.shape}")
    z = np.concatenate([x, h_prev])
    pre = params.W @ z + params.b
    i = expit(pre[:H])
    f = expit(pre[H:2 * H])
    o = expit(pre[2 * H:3 * H])
    g = np.tanh(pre[3 * H:])
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    return LstmOutput((h, c), h, LstmCache(z, i, f, o, g, c_prev, tanh_c))


def lstm_cell_backward(params: LstmParameters, cache: LstmCache, dh: np.ndarray, dc: np.ndarray) -> LstmGradients:
    """Backpropagate dL/dh and dL/dc of one step into its inputs and weights."""
    do = dh * cache.tanh_c
    dc = dc + dh * cache.o * (1.0 - cache.tanh_c ** 2)
    df = dc * cache.c_prev
    di = dc * cache.g
    dg = dc * cache.i
    dc_prev = dc * cache.f
    dpre = np.concatenate([
        di * cache.i * (1.0 - cache.i),
        df * cache.f * (1.0 - cache.f),
        do * cache.o * (1.0 - cache.o),
        dg * (1.0 - cache.g ** 2),
    ])
    dz = params.W.T @ dpre
    n_in = params.input_width
    return LstmGradients(dz[:n_in], dz[n_in:], dc_prev, np.outer(dpre, cache.z), dpre)
