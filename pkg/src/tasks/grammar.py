"""
Synchronous grammars in inversion-transduction form.

Grammars are written as plain text, one rule per line::

    root A
    1     A -> S1 VT2 O3 | S1 O3 VT2
    1/5   S -> S1 S2 | S1 S2
    class ST 33 si so

A rule line is ``<probability> <HEAD> -> <source items> | <target items>``.
Tokens made of an uppercase name and a link number (``S1``, ``VT2``) are
nonterminals; each link index appears exactly once on each side. All other
tokens are terminals. ``class NAME COUNT SRC TGT`` expands to COUNT
equiprobable rules ``NAME -> SRC<i> | TGT<i>``. ``#`` starts a comment.
"""

import re
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.exceptions import GrammarError
from core.types import TaskKind
from utils.logger import get_logger

logger = get_logger(__name__)

_NONTERMINAL = re.compile(r"^([A-Z][A-Z_]*)(\d+)$")
_PROBABILITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class NonterminalRef:
    symbol: str
    link: int

    def __str__(self):
        return f"{self.symbol}{self.link}"


Item = Union[str, NonterminalRef]


@dataclass(frozen=True)
class SyncRule:
    """``head -> source | target`` with a probability."""
    head: str
    probability: float
    source: Tuple[Item, ...]
    target: Tuple[Item, ...]
    terminal_class: Optional[str] = None

    @property
    def nonterminals(self) -> Tuple[NonterminalRef, ...]:
        """Source-side nonterminals ordered by link index."""
        refs = [item for item in self.source if isinstance(item, NonterminalRef)]
        return tuple(sorted(refs, key=lambda r: r.link))

    def __str__(self):
        src = " ".join(map(str, self.source))
        tgt = " ".join(map(str, self.target))
        return f"{self.head} -> {src} | {tgt}"


@dataclass(frozen=True, eq=False)
class SyncGrammar:
    """Rules grouped by head, a root symbol and the terminal classes."""
    name: str
    root: str
    rules: Dict[str, Tuple[SyncRule, ...]]
    terminal_classes: Dict[str, int]
    _tables: Dict[str, Tuple[Tuple[SyncRule, ...], np.ndarray]] = field(
        default_factory=dict, init=False, repr=False)

    def rule_table(self, head: str) -> Tuple[Tuple[SyncRule, ...], np.ndarray]:
        """Rules for ``head`` and their normalized cumulative probabilities."""
        table = self._tables.get(head)
        if table is None:
            rules = self.rules_for(head)
            cumulative = np.cumsum([r.probability for r in rules])
            table = self._tables[head] = (rules, cumulative / cumulative[-1])
        return table

    def rules_for(self, head: str) -> Tuple[SyncRule, ...]:
        try:
            return self.rules[head]
        except KeyError:
            raise GrammarError(f"no rules for nonterminal '{head}'", grammar=self.name) from None

    def source_terminals(self) -> List[str]:
        return self._terminals(lambda rule: rule.source)

    def target_terminals(self) -> List[str]:
        return self._terminals(lambda rule: rule.target)

    def content_pairs(self) -> Dict[str, str]:
        """Source terminal -> target terminal for every terminal-class rule."""
        pairs = {}
        for rules in self.rules.values():
            for rule in rules:
                if rule.terminal_class is not None:
                    pairs[rule.source[0]] = rule.target[0]
        return pairs

    def length_ratio(self) -> int:
        """Most target terminals any single rule emits per source terminal, at least 1."""
        ratio = 1
        for rules in self.rules.values():
            for rule in rules:
                source = sum(isinstance(item, str) for item in rule.source)
                target = sum(isinstance(item, str) for item in rule.target)
                ratio = max(ratio, -(-target // max(source, 1)))
        return ratio

    def _terminals(self, side) -> List[str]:
        seen: "OrderedDict[str, None]" = OrderedDict()
        for rules in self.rules.values():
            for rule in rules:
                for item in side(rule):
                    if isinstance(item, str):
                        seen.setdefault(item)
        return list(seen)


def _parse_probability(text: str, line_no: int) -> float:
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise GrammarError(f"line {line_no}: bad probability '{text}'", line=line_no) from None
    if not 0.0 < value <= 1.0:
        raise GrammarError(f"line {line_no}: probability {text} outside (0, 1]", line=line_no)
    return value


def _parse_items(tokens: Sequence[str]) -> Tuple[Item, ...]:
    items: List[Item] = []
    for token in tokens:
        match = _NONTERMINAL.match(token)
        items.append(NonterminalRef(match.group(1), int(match.group(2))) if match else token)
    return tuple(items)


def _check_links(head: str, source: Tuple[Item, ...], target: Tuple[Item, ...], line_no: int):
    def links(items):
        return sorted((i.link, i.symbol) for i in items if isinstance(i, NonterminalRef))

    src, tgt = links(source), links(target)
    if src != tgt:
        raise GrammarError(
            f"line {line_no}: linked nonterminals of '{head}' differ between source and target",
            line=line_no)
    indices = [link for link, _ in src]
    if len(set(indices)) != len(indices):
        raise GrammarError(f"line {line_no}: repeated link index in rule for '{head}'", line=line_no)


def parse_grammar(text: str, name: str = "grammar") -> SyncGrammar:
    """
    Parse grammar text.

    Raises:
        GrammarError: on syntax errors, unlinked nonterminals, undefined
            nonterminals, or per-head probabilities not summing to 1
    """
    root = None
    rules: "OrderedDict[str, List[SyncRule]]" = OrderedDict()
    classes: Dict[str, int] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "root":
            if len(tokens) != 2:
                raise GrammarError(f"line {line_no}: expected 'root <SYMBOL>'", line=line_no)
            root = tokens[1]
            continue
        if tokens[0] == "class":
            if len(tokens) != 5 or not tokens[2].isdigit() or int(tokens[2]) < 1:
                raise GrammarError(
                    f"line {line_no}: expected 'class <NAME> <COUNT> <SRC> <TGT>'", line=line_no)
            head, count, src_prefix, tgt_prefix = tokens[1], int(tokens[2]), tokens[3], tokens[4]
            classes[head] = count
            for i in range(1, count + 1):
                rules.setdefault(head, []).append(SyncRule(
                    head, 1.0 / count, (f"{src_prefix}{i}",), (f"{tgt_prefix}{i}",), terminal_class=head))
            continue

        if len(tokens) < 4 or tokens[2] != "->" or "|" not in tokens:
            raise GrammarError(
                f"line {line_no}: expected '<p> <HEAD> -> <source> | <target>'", line=line_no)
        probability = _parse_probability(tokens[0], line_no)
        head = tokens[1]
        bar = tokens.index("|")
        source = _parse_items(tokens[3:bar])
        target = _parse_items(tokens[bar + 1:])
        if not source or not target:
            raise GrammarError(f"line {line_no}: empty side in rule for '{head}'", line=line_no)
        _check_links(head, source, target, line_no)
        rules.setdefault(head, []).append(SyncRule(head, probability, source, target))

    if root is None:
        raise GrammarError(f"grammar '{name}' declares no root")
    if root not in rules:
        raise GrammarError(f"root '{root}' has no rules")

    for head, head_rules in rules.items():
        total = sum(r.probability for r in head_rules)
        if abs(total - 1.0) > _PROBABILITY_TOLERANCE:
            raise GrammarError(f"probabilities for '{head}' sum to {total:.6f}, not 1", head=head)
        for rule in head_rules:
            for ref in rule.nonterminals:
                if ref.symbol not in rules:
                    raise GrammarError(f"'{head}' refers to undefined nonterminal '{ref.symbol}'")

    grammar = SyncGrammar(name, root, {h: tuple(r) for h, r in rules.items()}, classes)
    logger.debug(f"Parsed grammar '{name}' with {sum(len(r) for r in rules.values())} rules")
    return grammar


SVO_SOV_GRAMMAR = """
# Subject-verb-object to subject-object-verb reordering
root A
1     A  -> S1 VT2 O3 | S1 O3 VT2
1/5   S  -> S1 S2 | S1 S2
1/5   S  -> S1 rpi S2 VT3 | S1 rpo S2 VT3
3/5   S  -> ST1 | ST1
1/5   O  -> O1 O2 | O1 O2
1/5   O  -> S1 rpi S2 VT3 | S1 rpo S2 VT3
3/5   O  -> OT1 | OT1
class ST 33 si so
class OT 33 oi oo
class VT 33 vi vo
"""

GENDER_GRAMMAR = """
# Genderless to gendered determiner agreement
root A
1     A -> B1 | B1
1/4   B -> B1 or B2 | B1 oder B2
1/4   B -> S1 and S2 | S1 und S2
1/2   B -> B1 V2 | B1 V2
3/4   V -> W1 B2 | W1 B2
1/4   V -> W1 | W1
1/6   S -> the M1 | der M1
1/6   S -> the F1 | die F1
1/6   S -> the N1 | das N1
1/6   S -> a M1 | ein M1
1/6   S -> a F1 | eine F1
1/6   S -> a N1 | ein N1
class W 25 we wg
class M 25 me mg
class F 25 fe fg
class N 25 ne ng
"""

_BUILTIN = {
    TaskKind.SVO_SOV: SVO_SOV_GRAMMAR,
    TaskKind.GENDER: GENDER_GRAMMAR,
}


def build_grammar(name: Union[str, TaskKind]) -> SyncGrammar:
    """Built-in grammar by task name (``svo-sov`` or ``gender``)."""
    try:
        kind = TaskKind(name)
        text = _BUILTIN[kind]
    except (ValueError, KeyError):
        raise GrammarError(f"no built-in grammar named '{name}'") from None
    return parse_grammar(text, kind.value)


def load_grammar(path: Union[str, Path]) -> SyncGrammar:
    """Parse a grammar file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise GrammarError(f"cannot read grammar file {path}: {e}") from e
    return parse_grammar(text, path.stem)
