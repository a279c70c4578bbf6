"""
Controller Module

LSTM cell, memory-augmented LSTM controller, deep LSTM benchmark, and the
parameter layout shared by all of them.
"""

from .deep_lstm import DeepLstmState, deep_lstm_step, deep_lstm_step_backward
from .lstm import LstmCache, LstmParameters, lstm_cell, lstm_cell_backward
from .memory_lstm import (
    ControllerCache, RecurrentAdjoint, RecurrentState, controller_step, controller_step_backward,
)
from .parameters import (
    ParameterCount, ParameterSet, count_parameters, init_parameters, parameter_shapes,
)
from .recurrent import RecurrentLayer, recurrent_layer

__all__ = [
    'LstmParameters', 'LstmCache', 'lstm_cell', 'lstm_cell_backward',
    'RecurrentState', 'RecurrentAdjoint', 'ControllerCache',
    'controller_step', 'controller_step_backward',
    'DeepLstmState', 'deep_lstm_step', 'deep_lstm_step_backward',
    'ParameterSet', 'ParameterCount', 'init_parameters', 'count_parameters', 'parameter_shapes',
    'RecurrentLayer', 'recurrent_layer',
]
