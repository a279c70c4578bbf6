"""
Elementwise gradient clipping and RMSProp.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from controller.parameters import ParameterSet
from core.exceptions import DimensionError, NumericInputError


def clip_gradients(grads: ParameterSet, threshold: float) -> ParameterSet:
    """
    Limit every gradient component to [-threshold, threshold].

    Arrays already inside the bound are returned as the same objects.
    """
    if not threshold > 0:
        raise NumericInputError(f"clip threshold must be positive, got {threshold}")

    def clip(a: np.ndarray) -> np.ndarray:
        if a.size == 0 or np.max(np.abs(a)) <= threshold:
            return a
        return np.clip(a, -threshold, threshold)

    return grads.map(clip)


@dataclass(frozen=True, eq=False)
class OptimizerState:
    """Running mean of squared gradients per parameter, and the step count."""
    mean_square: ParameterSet
    steps: int = 0

    @classmethod
    def zeros(cls, params: ParameterSet) -> "OptimizerState":
        return cls(params.zeros_like(), 0)


def rmsprop_update(params: ParameterSet, grads: ParameterSet, state: OptimizerState, lr: float,
                   decay: float = 0.95, eps: float = 1e-8) -> Tuple[ParameterSet, OptimizerState]:
    """
    One RMSProp step.

        ms    <- decay * ms + (1 - decay) * g^2
        param <- param - lr * g / sqrt(ms + eps)

    Returns new parameter and state objects; the inputs are not modified.

    Raises:
        DimensionError: if gradient or state layouts differ from the parameters
    """
    names = list(params)
    for other, what in ((grads, "gradient"), (state.mean_square, "optimizer state")):
        if list(other) != names or any(other[n].shape != params[n].shape for n in names):
            raise DimensionError(f"{what} layout does not match the parameters")

    new_params = ParameterSet()
    new_ms = ParameterSet()
    for name in names:
        g = grads[name]
        ms = decay * state.mean_square[name] + (1.0 - decay) * g * g
        new_ms[name] = ms
        new_params[name] = params[name] - lr * g / np.sqrt(ms + eps)
    return new_params, OptimizerState(new_ms, state.steps + 1)
