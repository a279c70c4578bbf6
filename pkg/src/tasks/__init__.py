"""
Tasks Module

Synthetic transductions, synchronous grammars and their samplers, and
dataset files.
"""

from .grammar import (
    GENDER_GRAMMAR, SVO_SOV_GRAMMAR, NonterminalRef, SyncGrammar, SyncRule, build_grammar,
    load_grammar, parse_grammar,
)
from .itg import (
    DEFAULT_MAX_ATTEMPTS, MAX_DEPTH, Derivation, content_pairs_agree, grammar_vocabulary,
    sample_derivation, sample_itg, validate_derivation,
)
from .streams import TransductionTask, build_task, read_dataset, write_dataset
from .synthetic import TRANSFORMS, bigram_flip, copy, gen_synthetic, reverse, sample_length

__all__ = [
    'NonterminalRef', 'SyncRule', 'SyncGrammar', 'parse_grammar', 'build_grammar', 'load_grammar',
    'SVO_SOV_GRAMMAR', 'GENDER_GRAMMAR',
    'Derivation', 'sample_derivation', 'sample_itg', 'grammar_vocabulary',
    'validate_derivation', 'content_pairs_agree', 'MAX_DEPTH', 'DEFAULT_MAX_ATTEMPTS',
    'TransductionTask', 'build_task', 'write_dataset', 'read_dataset',
    'gen_synthetic', 'sample_length', 'copy', 'reverse', 'bigram_flip', 'TRANSFORMS',
]
