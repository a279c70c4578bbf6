"""
Task objects, reproducible example streams and dataset files.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.schema import SampleConfig
from core.exceptions import TaskError, VocabularyError
from core.types import TaskKind
from seqmodel.vocabulary import TransductionExample, Vocabulary, encode_example
from utils.logger import get_logger

from .grammar import SyncGrammar, build_grammar, load_grammar
from .itg import DEFAULT_MAX_ATTEMPTS, grammar_vocabulary, sample_itg
from .synthetic import TRANSFORMS, gen_synthetic

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class TransductionTask:
    """A task kind bound to its vocabulary (and grammar, for ITG tasks)."""
    kind: TaskKind
    vocab: Vocabulary
    grammar: Optional[SyncGrammar] = None
    max_attempts: int = DEFAULT_MAX_ATTEMPTS

    @property
    def name(self) -> str:
        if self.kind is TaskKind.CUSTOM_GRAMMAR and self.grammar is not None:
            return self.grammar.name
        return self.kind.value

    def sample(self, length_range: Tuple[int, int], rng: np.random.Generator) -> TransductionExample:
        """Draw one example with source length in ``length_range``."""
        lo, hi = length_range
        if not 1 <= lo <= hi:
            raise TaskError(f"invalid length range [{lo}, {hi}]")
        if self.kind.is_synthetic:
            config = SampleConfig(min_len=lo, max_len=hi, vocab_size=self.vocab.source_size)
            return gen_synthetic(self.kind, config, rng, vocab=self.vocab)
        return sample_itg(self.grammar, (lo, hi), rng, self.vocab, self.max_attempts)

    def stream(self, length_range: Tuple[int, int], seed: int, stream_id: int = 0) -> Iterator[TransductionExample]:
        """Endless examples from a generator keyed by (seed, stream_id)."""
        rng = np.random.default_rng([seed, stream_id])
        while True:
            yield self.sample(length_range, rng)

    def batch(self, n: int, length_range: Tuple[int, int], seed: int,
              stream_id: int = 0) -> List[TransductionExample]:
        stream = self.stream(length_range, seed, stream_id)
        return [next(stream) for _ in range(n)]

    def max_target_len(self, length_range: Tuple[int, int]) -> int:
        """Longest target a source in ``length_range`` can have, EOS excluded."""
        longest = length_range[1]
        if self.kind.is_synthetic:
            return longest
        return longest * self.grammar.length_ratio()

    def transform(self, source: Sequence[int]) -> Tuple[int, ...]:
        """Target of a source under a synthetic transduction."""
        if not self.kind.is_synthetic:
            raise TaskError(f"'{self.kind.value}' has no deterministic transform")
        return TRANSFORMS[self.kind](tuple(int(s) for s in source))


def build_task(kind: Union[str, TaskKind], vocab_size: int = 128,
               grammar_file: Optional[Union[str, Path]] = None,
               max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> TransductionTask:
    """
    Build a task by name.

    Synthetic tasks get a vocabulary of ``vocab_size`` symbols; grammar tasks
    use the grammar's terminals.

    Raises:
        TaskError: for an unknown task or a missing grammar file
    """
    try:
        kind = TaskKind(kind)
    except ValueError:
        raise TaskError(f"unknown task '{kind}'") from None
    if kind.is_synthetic:
        return TransductionTask(kind, Vocabulary.synthetic(vocab_size), max_attempts=max_attempts)
    if kind is TaskKind.CUSTOM_GRAMMAR:
        if grammar_file is None:
            raise TaskError("task 'grammar' needs a grammar file")
        grammar = load_grammar(grammar_file)
    else:
        grammar = build_grammar(kind)
    logger.debug(f"Built task {kind.value}", extra={"context": {"rules": sum(
        len(r) for r in grammar.rules.values())}})
    return TransductionTask(kind, grammar_vocabulary(grammar), grammar, max_attempts)


def write_dataset(path: Union[str, Path], examples: Iterable[TransductionExample]) -> int:
    """Write examples as line-delimited JSON; returns the number written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for example in examples:
            f.write(json.dumps(example.to_record(), separators=(",", ":")) + "\n")
            count += 1
    logger.info(f"Wrote {count} examples to {path}")
    return count


def read_dataset(path: Union[str, Path], vocab: Vocabulary) -> List[TransductionExample]:
    """
    Read a line-delimited JSON dataset.

    Raises:
        VocabularyError: for malformed lines or out-of-vocabulary indices
    """
    path = Path(path)
    examples = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                source, target = record["source"], record["target"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise VocabularyError(f"{path}:{line_no}: malformed record ({e})", line=line_no) from e
            examples.append(encode_example(source, target, vocab))
    return examples
