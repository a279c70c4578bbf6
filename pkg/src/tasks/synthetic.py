"""
Synthetic transductions: copy, reversal and bigram flipping.
"""

from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from config.schema import SampleConfig
from core.exceptions import TaskError
from core.types import TaskKind
from seqmodel.vocabulary import RESERVED, TransductionExample, Vocabulary, encode_example


def copy(source: Sequence[int]) -> Tuple[int, ...]:
    return tuple(source)


def reverse(source: Sequence[int]) -> Tuple[int, ...]:
    return tuple(reversed(source))


def bigram_flip(source: Sequence[int]) -> Tuple[int, ...]:
    """Swap each symbol pair: a1 a2 a3 a4 -> a2 a1 a4 a3."""
    if len(source) % 2:
        raise TaskError(f"bigram-flip needs an even length, got {len(source)}", length=len(source))
    flipped = list(source)
    flipped[0::2], flipped[1::2] = source[1::2], source[0::2]
    return tuple(flipped)


TRANSFORMS: Dict[TaskKind, Callable[[Sequence[int]], Tuple[int, ...]]] = {
    TaskKind.COPY: copy,
    TaskKind.REVERSE: reverse,
    TaskKind.BIGRAM_FLIP: bigram_flip,
}


def sample_length(kind: TaskKind, length_range: Tuple[int, int], rng: np.random.Generator) -> int:
    """Uniform length in the range; even lengths only for bigram flipping."""
    lo, hi = length_range
    if kind is TaskKind.BIGRAM_FLIP:
        lo, hi = lo + lo % 2, hi - hi % 2
        if lo > hi:
            raise TaskError(f"no even length in [{length_range[0]}, {length_range[1]}]")
        return 2 * int(rng.integers(lo // 2, hi // 2 + 1))
    return int(rng.integers(lo, hi + 1))


def gen_synthetic(kind: TaskKind, config: SampleConfig, rng: np.random.Generator,
                  vocab: Optional[Vocabulary] = None, length: Optional[int] = None) -> TransductionExample:
    """
    Draw one synthetic example.

    Args:
        kind: copy, reverse or bigram-flip
        config: length range and vocabulary size
        rng: random generator
        vocab: vocabulary to encode against; defaults to a synthetic one of ``config.vocab_size``
        length: fixed source length instead of a uniform draw

    Returns:
        TransductionExample whose target is the deterministic transform of the source

    Raises:
        TaskError: for a non-synthetic kind or an odd bigram-flip length
    """
    kind = TaskKind(kind)
    if not kind.is_synthetic:
        raise TaskError(f"'{kind.value}' is not a synthetic task")
    vocab = vocab or Vocabulary.synthetic(config.vocab_size)
    if length is None:
        length = sample_length(kind, config.length_range, rng)
    elif length < 1:
        raise TaskError(f"source length must be positive, got {length}")
    source = rng.integers(RESERVED, RESERVED + vocab.source_size, size=length)
    return encode_example(source, TRANSFORMS[kind](tuple(int(s) for s in source)), vocab)
