"""
Greedy decoding.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from controller import recurrent_layer
from core.exceptions import NumericError, VocabularyError

from .vocabulary import EOS, SEP, SOS


@dataclass(frozen=True)
class DecodeResult:
    """Emitted target symbols (EOS excluded) and whether the length cap was hit."""
    tokens: Tuple[int, ...]
    truncated: bool

    def prediction(self) -> List[int]:
        """Tokens in the form accuracy compares against ``target + [EOS]``."""
        return list(self.tokens) if self.truncated else list(self.tokens) + [EOS]


def default_max_len(max_target_len: int) -> int:
    return 2 * max_target_len + 2


def greedy_decode(model, source: Sequence[int], max_len: int) -> DecodeResult:
    """
    Read ``SOS source SEP`` then emit the most probable symbol until EOS.

    Ties go to the lowest class index. At most ``max_len`` symbols are
    emitted; reaching the cap sets ``truncated``.
    """
    if max_len < 0:
        raise VocabularyError(f"max_len must be non-negative, got {max_len}")
    model.vocab.check_source(source)
    layer = recurrent_layer(model.config)
    embedding = model.params["embedding.input"]
    W = model.params["output.W_softmax"]
    b = model.params["output.b_softmax"]
    vocab = model.vocab

    state = layer.initial_state(model)
    o = None
    for token in (SOS, *source, SEP):
        state, o, _ = layer.step(model, state, embedding[vocab.input_row(token, False)])

    tokens: List[int] = []
    for _ in range(max_len):
        logits = W @ o + b
        if not np.all(np.isfinite(logits)):
            raise NumericError("non-finite logits while decoding", emitted=len(tokens))
        cls_index = int(np.argmax(logits))
        if cls_index == 0:
            return DecodeResult(tuple(tokens), False)
        token = vocab.class_token(cls_index)
        tokens.append(token)
        state, o, _ = layer.step(model, state, embedding[vocab.input_row(token, True)])
    return DecodeResult(tuple(tokens), True)
