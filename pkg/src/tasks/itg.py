"""
Length-controlled sampling from synchronous grammars.

A derivation is expanded top-down from the root, choosing each rule by its
probability. Source and target strings are the yields of the same tree,
with linked nonterminals expanded once and placed where each side puts
them. Samples outside the length range are rejected and redrawn.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import RejectionBudgetError
from seqmodel.vocabulary import TransductionExample, Vocabulary, encode_example
from utils.logger import get_logger

from .grammar import NonterminalRef, SyncGrammar, SyncRule

logger = get_logger(__name__)

MAX_DEPTH = 64
DEFAULT_MAX_ATTEMPTS = 10000


@dataclass(frozen=True)
class Derivation:
    """A rule application and the derivations of its linked nonterminals, by link index."""
    rule: SyncRule
    children: Dict[int, "Derivation"]

    def source_yield(self) -> List[str]:
        return self._yield(False)

    def target_yield(self) -> List[str]:
        return self._yield(True)

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children.values()), default=0)

    def rules(self) -> List[SyncRule]:
        """Every rule application, pre-order."""
        out = [self.rule]
        for link in sorted(self.children):
            out.extend(self.children[link].rules())
        return out

    def _yield(self, target_side: bool) -> List[str]:
        out: List[str] = []
        for item in (self.rule.target if target_side else self.rule.source):
            if isinstance(item, NonterminalRef):
                out.extend(self.children[item.link]._yield(target_side))
            else:
                out.append(item)
        return out


class _Abort(Exception):
    """Expansion went past the depth cap or the source length bound."""


class _Expander:
    def __init__(self, grammar: SyncGrammar, rng: np.random.Generator, max_source: int,
                 max_depth: int = MAX_DEPTH):
        self.grammar = grammar
        self.rng = rng
        self.max_source = max_source
        self.max_depth = max_depth
        self.emitted = 0

    def expand(self, head: str, depth: int = 1) -> Derivation:
        if depth > self.max_depth:
            raise _Abort("depth")
        rules, cumulative = self.grammar.rule_table(head)
        rule = rules[min(int(np.searchsorted(cumulative, self.rng.random(), side="right")),
                         len(rules) - 1)]
        self.emitted += sum(1 for item in rule.source if not isinstance(item, NonterminalRef))
        if self.emitted > self.max_source:
            raise _Abort("length")
        children = {ref.link: self.expand(ref.symbol, depth + 1) for ref in rule.nonterminals}
        return Derivation(rule, children)


def sample_derivation(grammar: SyncGrammar, length_range: Tuple[int, int], rng: np.random.Generator,
                      max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> Derivation:
    """
    Draw derivations until the source yield length lies in ``length_range``.

    Each expansion that exceeds the depth cap or the upper length bound is
    abandoned and counts as an attempt.

    Raises:
        RejectionBudgetError: if ``max_attempts`` draws were all rejected
    """
    lo, hi = length_range
    reasons: Counter = Counter()
    for attempt in range(1, max_attempts + 1):
        expander = _Expander(grammar, rng, hi)
        try:
            derivation = expander.expand(grammar.root)
        except _Abort as abort:
            reasons[str(abort)] += 1
            continue
        if expander.emitted >= lo:
            if attempt > 1:
                logger.debug(f"Accepted {grammar.name} sample after {attempt} attempts",
                             extra={"context": dict(reasons)})
            return derivation
        reasons["short"] += 1
    raise RejectionBudgetError(
        f"no {grammar.name} sample with source length in [{lo}, {hi}] after {max_attempts} attempts",
        attempts=max_attempts, **dict(reasons))


def sample_itg(grammar: SyncGrammar, length_range: Tuple[int, int], rng: np.random.Generator,
               vocab: Optional[Vocabulary] = None,
               max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> TransductionExample:
    """Sample a source/target pair; the example keeps its derivation."""
    vocab = vocab or grammar_vocabulary(grammar)
    derivation = sample_derivation(grammar, length_range, rng, max_attempts)
    return encode_example(vocab.encode_source(derivation.source_yield()),
                          vocab.encode_target(derivation.target_yield()),
                          vocab, derivation)


def grammar_vocabulary(grammar: SyncGrammar) -> Vocabulary:
    """Vocabulary made of every terminal the grammar can emit on each side."""
    return Vocabulary.from_symbols(grammar.source_terminals(), grammar.target_terminals())


def validate_derivation(grammar: SyncGrammar, derivation: Derivation,
                        source: Sequence[str], target: Sequence[str]) -> bool:
    """
    Check that a derivation uses the grammar's own rules, expands every link
    with the linked nonterminal, and yields exactly ``source`` and ``target``.
    """
    if derivation.rule.head != grammar.root:
        return False

    def well_formed(node: Derivation) -> bool:
        if node.rule not in grammar.rules.get(node.rule.head, ()):
            return False
        refs = {ref.link: ref.symbol for ref in node.rule.nonterminals}
        if set(refs) != set(node.children):
            return False
        return all(node.children[link].rule.head == symbol and well_formed(node.children[link])
                   for link, symbol in refs.items())

    return (well_formed(derivation)
            and derivation.source_yield() == list(source)
            and derivation.target_yield() == list(target))


def content_pairs_agree(grammar: SyncGrammar, source: Sequence[str], target: Sequence[str]) -> bool:
    """Content words on the source map one-to-one onto the content words of the target."""
    pairs = grammar.content_pairs()
    content_targets = set(pairs.values())
    mapped = Counter(pairs[s] for s in source if s in pairs)
    return mapped == Counter(t for t in target if t in content_targets)
