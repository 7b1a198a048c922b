"""Deterministic 2-tag systems: validation, stepping, bounded runs, text format.

A computation step reads the leftmost symbol, deletes the two leftmost
symbols and appends the read symbol's right-hand side. A run completes when
the word is shorter than two symbols, when the read symbol has no rule, or
when a configuration repeats.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from tagforge._cycles import DEFAULT_MEMORY_CAP, CycleMonitor

Symbol = Hashable
Word = Tuple[Symbol, ...]

DELETION_NUMBER = 2


class HaltReason(str, enum.Enum):
    WORD_TOO_SHORT = "WordTooShort"
    NO_RULE = "NoRuleForReadSymbol"
    CYCLE = "CycleDetected"
    STEP_LIMIT = "StepLimitReached"


@dataclass(frozen=True)
class UnknownSymbol:
    symbol: Symbol
    lhs: Symbol  # rule in which it occurs


@dataclass(frozen=True)
class BadDeletionNumber:
    value: int


Violation = Union[UnknownSymbol, BadDeletionNumber]


@dataclass(frozen=True)
class TagSystem:
    rules: Mapping[Symbol, Word]
    alphabet: frozenset = frozenset()
    deletion: int = DELETION_NUMBER

    @classmethod
    def from_rules(cls, rules: Mapping[Symbol, Iterable[Symbol]], alphabet: Optional[Iterable[Symbol]] = None) -> "TagSystem":
        """Build a system whose alphabet defaults to every symbol mentioned in ``rules``."""
        frozen = {lhs: tuple(rhs) for lhs, rhs in rules.items()}
        if alphabet is None:
            seen = set(frozen)
            for rhs in frozen.values():
                seen.update(rhs)
            alphabet = seen
        return cls(rules=frozen, alphabet=frozenset(alphabet))


@dataclass(frozen=True)
class TagConfig:
    word: Word
    steps: int = 0


class TraceEntry(NamedTuple):
    step: int  # index of the step, starting at 1
    read: Symbol
    appended: int
    word: Optional[Word] = None  # word after the step, verbose traces only


@dataclass
class RunResult:
    word: Word
    steps: int
    halt: HaltReason
    trace: Optional[List[TraceEntry]] = None
    cycle_entry: Optional[int] = None
    cycle_period: Optional[int] = None


def validate(ts: TagSystem) -> List[Violation]:
    violations: List[Violation] = []
    if ts.deletion != DELETION_NUMBER:
        violations.append(BadDeletionNumber(ts.deletion))
    for lhs, rhs in ts.rules.items():
        if lhs not in ts.alphabet:
            violations.append(UnknownSymbol(lhs, lhs))
        for sym in rhs:
            if sym not in ts.alphabet:
                violations.append(UnknownSymbol(sym, lhs))
    return violations


def step(ts: TagSystem, cfg: TagConfig) -> Union[TagConfig, HaltReason]:
    word = cfg.word
    if len(word) < DELETION_NUMBER:
        return HaltReason.WORD_TOO_SHORT
    rhs = ts.rules.get(word[0])
    if rhs is None:
        return HaltReason.NO_RULE
    return TagConfig(word[DELETION_NUMBER:] + rhs, cfg.steps + 1)


def round_length(word: Sequence[Any]) -> int:
    """Number of steps in one traversal of ``word``."""
    return math.ceil(len(word) / 2)


def run(
    ts: TagSystem,
    word: Iterable[Symbol],
    max_steps: Optional[int] = None,
    detect_cycles: bool = True,
    cycle_memory: int = DEFAULT_MEMORY_CAP,
    trace: bool = False,
    verbose: bool = False,
) -> RunResult:
    """Iterate :func:`step` from ``word`` until a halt condition.

    Cycles are reported at the step index where a configuration first
    recurs; ``cycle_entry`` is the index of its earlier occurrence.
    """
    rules = ts.rules
    current: Word = tuple(word)
    records: Optional[List[TraceEntry]] = [] if trace else None

    def advance(w: Word) -> Word:
        return w[2:] + rules[w[0]]

    monitor = CycleMonitor(advance, cycle_memory) if detect_cycles else None
    if monitor is not None:
        monitor.observe(current, 0)
    n = 0
    while True:
        if len(current) < DELETION_NUMBER:
            return RunResult(current, n, HaltReason.WORD_TOO_SHORT, records)
        read = current[0]
        rhs = rules.get(read)
        if rhs is None:
            return RunResult(current, n, HaltReason.NO_RULE, records)
        if max_steps is not None and n >= max_steps:
            return RunResult(current, n, HaltReason.STEP_LIMIT, records)
        current = current[2:] + rhs
        n += 1
        if records is not None:
            records.append(TraceEntry(n, read, len(rhs), current if verbose else None))
        if monitor is not None:
            hit = monitor.observe(current, n)
            if hit is not None:
                first = hit.entry + hit.period
                if records is not None:
                    del records[first:]
                return RunResult(hit.state, first, HaltReason.CYCLE, records, hit.entry, hit.period)


# --- text format -----------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _strip_comment(line: str) -> List[str]:
    tokens = []
    for tok in line.split():
        if tok.startswith("#"):
            break
        tokens.append(tok)
    return tokens


def parse_2tag(text: str) -> TagSystem:
    """Parse the ``.2tag`` format: one ``lhs -> rhs...`` rule per line.

    A token starting with ``#`` begins a comment; ``#`` inside a token is
    part of the symbol name.
    """
    rules: Dict[str, Word] = {}
    alphabet = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _strip_comment(raw)
        if not tokens:
            continue
        if "->" not in tokens:
            raise ParseError(lineno, "expected 'symbol -> symbols...'")
        arrow = tokens.index("->")
        if arrow != 1:
            raise ParseError(lineno, "left-hand side must be exactly one symbol")
        lhs, rhs = tokens[0], tuple(tokens[2:])
        if "->" in rhs:
            raise ParseError(lineno, "more than one '->'")
        if lhs in rules:
            raise ParseError(lineno, f"duplicate rule for {lhs!r}")
        rules[lhs] = rhs
        alphabet.add(lhs)
        alphabet.update(rhs)
    return TagSystem(rules=rules, alphabet=frozenset(alphabet))


def format_2tag(ts: TagSystem, render: Callable[[Symbol], str] = str, header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    for lhs, rhs in ts.rules.items():
        lines.append(" ".join([render(lhs), "->", *map(render, rhs)]).rstrip())
    return "\n".join(lines) + "\n"


def parse_word(text: str) -> Word:
    return tuple(text.split())
