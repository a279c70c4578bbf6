"""
Vocabularies, transduction examples and the joint sequence encoding.

Source and target sides have separate mappings. Both reserve indices
SOS=0, SEP=1, EOS=2 and number their symbols from 3.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from core.exceptions import VocabularyError

SOS = 0
SEP = 1
EOS = 2
RESERVED = 3
RESERVED_SYMBOLS = ("<s>", "<sep>", "</s>")


@dataclass(frozen=True)
class Vocabulary:
    """Source and target symbol inventories."""
    source_symbols: Tuple[str, ...]
    target_symbols: Tuple[str, ...]
    _source_index: Dict[str, int] = field(init=False, repr=False, compare=False)
    _target_index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for side, symbols in (("source", self.source_symbols), ("target", self.target_symbols)):
            if len(set(symbols)) != len(symbols):
                raise VocabularyError(f"{side} vocabulary has duplicate symbols")
            if not symbols:
                raise VocabularyError(f"{side} vocabulary is empty")
        object.__setattr__(self, "_source_index",
                           {s: i + RESERVED for i, s in enumerate(self.source_symbols)})
        object.__setattr__(self, "_target_index",
                           {s: i + RESERVED for i, s in enumerate(self.target_symbols)})

    @classmethod
    def synthetic(cls, size: int) -> "Vocabulary":
        """Same ``size`` symbols on both sides, named ``x0 .. x<size-1>``."""
        if size < 1:
            raise VocabularyError(f"vocabulary size must be positive, got {size}")
        symbols = tuple(f"x{k}" for k in range(size))
        return cls(symbols, symbols)

    @classmethod
    def from_symbols(cls, source: Iterable[str], target: Iterable[str]) -> "Vocabulary":
        return cls(tuple(source), tuple(target))

    @property
    def source_size(self) -> int:
        return len(self.source_symbols)

    @property
    def target_size(self) -> int:
        return len(self.target_symbols)

    @property
    def input_rows(self) -> int:
        return RESERVED + self.source_size + self.target_size

    @property
    def output_classes(self) -> int:
        return self.target_size + 1

    def encode_source(self, symbols: Iterable[str]) -> List[int]:
        return [self._lookup(self._source_index, s, "source") for s in symbols]

    def encode_target(self, symbols: Iterable[str]) -> List[int]:
        return [self._lookup(self._target_index, s, "target") for s in symbols]

    def decode_source(self, indices: Iterable[int]) -> List[str]:
        return [self._symbol(self.source_symbols, i, "source") for i in indices]

    def decode_target(self, indices: Iterable[int]) -> List[str]:
        return [self._symbol(self.target_symbols, i, "target") for i in indices]

    def check_source(self, indices: Sequence[int]):
        self._check_range(indices, self.source_size, "source")

    def check_target(self, indices: Sequence[int]):
        self._check_range(indices, self.target_size, "target")

    def input_row(self, index: int, target_side: bool) -> int:
        """Embedding row of a joint-sequence index."""
        if index < RESERVED:
            return index
        if target_side:
            return RESERVED + self.source_size + (index - RESERVED)
        return index

    @staticmethod
    def output_class(index: int) -> int:
        """Softmax class of a target index (EOS is class 0)."""
        return 0 if index == EOS else index - (RESERVED - 1)

    @staticmethod
    def class_token(cls_index: int) -> int:
        """Target index of a softmax class."""
        return EOS if cls_index == 0 else cls_index + (RESERVED - 1)

    def to_dict(self) -> Dict[str, Any]:
        return {"source": list(self.source_symbols), "target": list(self.target_symbols)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Vocabulary":
        try:
            return cls(tuple(data["source"]), tuple(data["target"]))
        except (KeyError, TypeError) as e:
            raise VocabularyError(f"malformed vocabulary record: {e}") from e

    @staticmethod
    def _lookup(index: Dict[str, int], symbol: str, side: str) -> int:
        try:
            return index[symbol]
        except KeyError:
            raise VocabularyError(f"unknown {side} symbol '{symbol}'", symbol=symbol) from None

    @staticmethod
    def _symbol(symbols: Tuple[str, ...], index: int, side: str) -> str:
        if index < RESERVED:
            return RESERVED_SYMBOLS[index]
        if index - RESERVED >= len(symbols):
            raise VocabularyError(f"{side} index {index} outside vocabulary", index=index)
        return symbols[index - RESERVED]

    @staticmethod
    def _check_range(indices: Sequence[int], size: int, side: str):
        for position, index in enumerate(indices):
            if not RESERVED <= int(index) < RESERVED + size:
                raise VocabularyError(
                    f"{side} index {index} at position {position} is not a {side} symbol "
                    f"(valid: {RESERVED}..{RESERVED + size - 1})", position=position, index=int(index))


@dataclass(frozen=True)
class TransductionExample:
    """A source/target pair with its joint encoding SOS source SEP target EOS."""
    source: Tuple[int, ...]
    target: Tuple[int, ...]
    joint: Tuple[int, ...]
    derivation: Optional[Any] = field(default=None, compare=False, repr=False)

    @property
    def scored_positions(self) -> int:
        """Predictions the loss covers: every target symbol plus EOS."""
        return len(self.target) + 1

    @property
    def separator_position(self) -> int:
        return len(self.source) + 1

    def target_with_eos(self) -> List[int]:
        return list(self.target) + [EOS]

    def to_record(self) -> Dict[str, List[int]]:
        return {"source": list(self.source), "target": list(self.target)}


def encode_example(source: Sequence[int], target: Sequence[int], vocab: Vocabulary,
                   derivation: Any = None) -> TransductionExample:
    """
    Build the joint sequence ``SOS source SEP target EOS``.

    Args:
        source: source indices (each >= 3)
        target: target indices (each >= 3)
        vocab: vocabulary the indices belong to

    Returns:
        TransductionExample

    Raises:
        VocabularyError: if an index is reserved or outside the vocabulary
    """
    source = tuple(int(s) for s in source)
    target = tuple(int(t) for t in target)
    vocab.check_source(source)
    vocab.check_target(target)
    joint = (SOS,) + source + (SEP,) + target + (EOS,)
    return TransductionExample(source, target, joint, derivation)


def decode_joint(joint: Sequence[int]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Split a joint sequence back into (source, target)."""
    joint = [int(j) for j in joint]
    if len(joint) < 3 or joint[0] != SOS or joint[-1] != EOS or joint.count(SEP) != 1:
        raise VocabularyError("joint sequence must look like SOS source SEP target EOS")
    sep = joint.index(SEP)
    return tuple(joint[1:sep]), tuple(joint[sep + 1:-1])
