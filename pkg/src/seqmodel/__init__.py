"""
Sequence Model Module

Joint-sequence encoding, the transduction model's forward and backward
passes, batching, and greedy decoding.
"""

from .decoding import DecodeResult, default_max_len, greedy_decode
from .model import (
    BatchResult, ForwardResult, LossReport, StepTrace, TransductionModel, accumulate_gradients,
    batch_gradients, build_model, model_backward, model_forward,
)
from .vocabulary import (
    EOS, SEP, SOS, TransductionExample, Vocabulary, decode_joint, encode_example,
)

__all__ = [
    'SOS', 'SEP', 'EOS', 'Vocabulary', 'TransductionExample', 'encode_example', 'decode_joint',
    'TransductionModel', 'build_model', 'model_forward', 'model_backward',
    'LossReport', 'StepTrace', 'ForwardResult', 'BatchResult',
    'batch_gradients', 'accumulate_gradients',
    'DecodeResult', 'greedy_decode', 'default_max_len',
]
