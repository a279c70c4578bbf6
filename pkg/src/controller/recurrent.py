"""
Uniform access to the recurrent layer of a model, memory-augmented or deep.
"""

from dataclasses import dataclass
from typing import Callable

from . import deep_lstm, memory_lstm


@dataclass(frozen=True)
class RecurrentLayer:
    initial_state: Callable
    step: Callable
    step_backward: Callable
    zero_adjoint: Callable
    finish_backward: Callable


MEMORY_LAYER = RecurrentLayer(
    initial_state=memory_lstm.initial_state,
    step=memory_lstm.controller_step,
    step_backward=memory_lstm.controller_step_backward,
    zero_adjoint=memory_lstm.zero_adjoint,
    finish_backward=memory_lstm.finish_backward,
)

DEEP_LAYER = RecurrentLayer(
    initial_state=deep_lstm.initial_state,
    step=deep_lstm.deep_lstm_step,
    step_backward=deep_lstm.deep_lstm_step_backward,
    zero_adjoint=deep_lstm.zero_adjoint,
    finish_backward=deep_lstm.finish_backward,
)


def recurrent_layer(config) -> RecurrentLayer:
    """Layer functions for ``config.kind``."""
    return DEEP_LAYER if config.memory_kind is None else MEMORY_LAYER
