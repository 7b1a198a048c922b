"""Decorated 2-tag symbols and the encoding of cyclic configurations.

A cyclic configuration ``(k, x0 x1 ... xl)`` is written as symbol pairs:
the barred head pair for ``x0``, one pair per remaining bit, and a
contiguous block of ``a`` pairs (the counter) after the first ``cut`` bit
pairs. The counter holds a power of two no smaller than the dataword length,
so it strictly exceeds the index ``l`` of the last bit.

Canonical rendering of a symbol is ``base dot [~] [!] @stage #k`` with
``base`` in ``0 1 a h`` (``h`` is the parity-restoring hash), ``dot`` one of
``.`` (plain), ``:`` (dotted), ``;`` (third), ``~`` for barred and ``!`` for
marked, e.g. ``1:~@CK#2``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

ZERO, ONE, A, HASH = "0", "1", "a", "#"
BASES = (ZERO, ONE, A, HASH)
PLAIN, DOTTED, THIRD = 0, 1, 2


class Stage(enum.IntEnum):
    CHECKPOINT = 0
    DISPATCH = 1
    INJECT = 2
    FRESH = 3
    CU1 = 4
    CU2 = 5
    CU3 = 6
    CU4 = 7
    CU5 = 8
    CU6 = 9
    CU7 = 10
    PB1 = 11
    PB2 = 12
    PB3 = 13
    PB4 = 14
    PB5 = 15
    PB6 = 16
    REP1 = 17
    REP2 = 18
    REP2R = 19
    MARKER = 20

    @property
    def short(self) -> str:
        return _SHORT[self]


_SHORT = {
    Stage.CHECKPOINT: "CK",
    Stage.DISPATCH: "D",
    Stage.INJECT: "INJ",
    Stage.FRESH: "FR",
    **{Stage[f"CU{i}"]: f"CU{i}" for i in range(1, 8)},
    **{Stage[f"PB{i}"]: f"PB{i}" for i in range(1, 7)},
    Stage.REP1: "R1",
    Stage.REP2: "R2",
    Stage.REP2R: "R2R",
    Stage.MARKER: "MI",
}
_BY_SHORT = {v: k for k, v in _SHORT.items()}


class DecoratedSymbol(NamedTuple):
    base: str
    dot: int
    barred: bool
    marked: bool
    stage: Stage
    k: int

    def __str__(self) -> str:
        return render_symbol(self)


_BASE_TEXT = {ZERO: "0", ONE: "1", A: "a", HASH: "h"}
_TEXT_BASE = {v: k for k, v in _BASE_TEXT.items()}
_DOT_TEXT = ".:;"
_SYMBOL_RE = re.compile(r"^([01ah])([.:;])(~?)(!?)@([A-Z0-9]+)#(\d+)$")


def render_symbol(s: DecoratedSymbol) -> str:
    return (
        f"{_BASE_TEXT[s.base]}{_DOT_TEXT[s.dot]}{'~' if s.barred else ''}"
        f"{'!' if s.marked else ''}@{_SHORT[s.stage]}#{s.k}"
    )


def parse_symbol(text: str) -> DecoratedSymbol:
    m = _SYMBOL_RE.match(text)
    if m is None or m.group(5) not in _BY_SHORT:
        raise ValueError(f"not a decorated symbol: {text!r}")
    base, dot, bar, mark, stage, k = m.groups()
    return DecoratedSymbol(_TEXT_BASE[base], _DOT_TEXT.index(dot), bar == "~", mark == "!", _BY_SHORT[stage], int(k))


def symbol_problems(s: DecoratedSymbol) -> List[str]:
    """Decoration rules every symbol of the construction obeys."""
    problems = []
    if s.base == HASH and (s.dot != PLAIN or s.barred or s.marked):
        problems.append("hash symbols carry no dot, bar or mark")
    if s.base == A and s.barred:
        problems.append("counter symbols are never barred")
    if s.base not in BASES:
        problems.append(f"unknown base {s.base!r}")
    return problems


# --- word builders -----------------------------------------------------------


def pair(base: str, stage: Stage, k: int, marked: bool = False, barred: bool = False) -> Tuple[DecoratedSymbol, ...]:
    return (
        DecoratedSymbol(base, PLAIN, barred, marked, stage, k),
        DecoratedSymbol(base, DOTTED, barred, marked, stage, k),
    )


def triple(base: str, stage: Stage, k: int, barred: bool = False) -> Tuple[DecoratedSymbol, ...]:
    return pair(base, stage, k, barred=barred) + (DecoratedSymbol(base, THIRD, barred, False, stage, k),)


def hash_symbol(stage: Stage, k: int) -> DecoratedSymbol:
    return DecoratedSymbol(HASH, PLAIN, False, False, stage, k)


def counter_for_length(n: int) -> int:
    """Smallest power of two that is at least ``n`` (1 for n <= 1)."""
    return 1 << max(n - 1, 0).bit_length()


def encode_config(
    dataword: str, k: int, counter: int, cut: Optional[int] = None, stage: Stage = Stage.CHECKPOINT
) -> Tuple[DecoratedSymbol, ...]:
    """Encode ``(k, dataword)`` with ``counter`` a-pairs after ``cut`` bit pairs.

    ``cut`` defaults to placing the counter after every bit pair. The empty
    dataword is encoded as the bare counter.
    """
    if counter < 1:
        raise ValueError("counter must be positive")
    if not dataword:
        return sum((pair(A, stage, k) for _ in range(counter)), ())
    rest = dataword[1:]
    if cut is None:
        cut = len(rest)
    if not 0 <= cut <= len(rest):
        raise ValueError(f"cut point {cut} outside 0..{len(rest)}")
    out: List[DecoratedSymbol] = list(pair(dataword[0], stage, k, barred=True))
    for bit in rest[:cut]:
        out.extend(pair(bit, stage, k))
    for _ in range(counter):
        out.extend(pair(A, stage, k))
    for bit in rest[cut:]:
        out.extend(pair(bit, stage, k))
    return tuple(out)


class EmptyInput(ValueError):
    pass


def encode_input(word: str, p: int) -> Tuple[DecoratedSymbol, ...]:
    """Initial 2-tag word for input ``word``: marker 0, counter 2^ceil(log2 |word|)."""
    if not word:
        raise EmptyInput("input dataword must be non-empty")
    if p < 1:
        raise ValueError("appendant count must be positive")
    if any(ch not in "01" for ch in word):
        raise ValueError(f"input {word!r} is not a binary word")
    return encode_config(word, 0, counter_for_length(len(word)))


# --- decoding ------------------------------------------------------------------


class Reason(str, enum.Enum):
    DANGLING_HALF_PAIR = "DanglingHalfPair"
    BAD_PAIR = "BadPair"
    MIXED_STAGES = "MixedStages"
    MIXED_APPENDANT = "MixedAppendant"
    STRAY_HASH = "StrayHash"
    MARKED_SYMBOL = "MarkedSymbol"
    NO_HEAD = "NoHead"
    MULTIPLE_HEADS = "MultipleHeads"
    HEAD_NOT_FIRST = "HeadNotFirst"
    NO_COUNTER = "NoCounter"
    SPLIT_COUNTER = "SplitCounter"
    COUNTER_NOT_POWER_OF_TWO = "CounterNotPowerOfTwo"
    COUNTER_TOO_SMALL = "CounterTooSmall"


@dataclass(frozen=True)
class NotACheckpoint:
    reason: Reason
    detail: str = ""


class Malformed(ValueError):
    def __init__(self, reason: Reason, detail: str = ""):
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)
        self.reason = reason


class Item(NamedTuple):
    """One well-formed pair: its shared decorations."""

    base: str
    barred: bool
    marked: bool
    stage: Stage
    k: int


@dataclass(frozen=True)
class DecodedView:
    dataword: str
    appendant_index: int
    counter: int
    cut: int
    stage: Stage

    @property
    def length(self) -> int:
        return len(self.dataword)


def pairs_of(word: Sequence[DecoratedSymbol]) -> List[Item]:
    if len(word) % 2:
        raise Malformed(Reason.DANGLING_HALF_PAIR, f"odd length {len(word)}")
    items = []
    for j in range(0, len(word), 2):
        first, second = word[j], word[j + 1]
        if first.base == HASH or second.base == HASH:
            raise Malformed(Reason.STRAY_HASH, f"at symbol {j}")
        if (
            first.dot != PLAIN
            or second.dot != DOTTED
            or first[:1] != second[:1]
            or first[2:] != second[2:]
        ):
            raise Malformed(Reason.BAD_PAIR, f"symbols {j},{j + 1}")
        items.append(Item(first.base, first.barred, first.marked, first.stage, first.k))
    return items


def _counter_span(items: Sequence[Item]) -> Tuple[int, int]:
    idx = [j for j, it in enumerate(items) if it.base == A]
    if not idx:
        raise Malformed(Reason.NO_COUNTER)
    if idx[-1] - idx[0] + 1 != len(idx):
        raise Malformed(Reason.SPLIT_COUNTER)
    return idx[0], len(idx)


def counter_value(word: Sequence[DecoratedSymbol]) -> int:
    return _counter_span(pairs_of(word))[1]


class BarSide(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


def bar_side(word: Sequence[DecoratedSymbol]) -> BarSide:
    """Whether the head pair precedes the counter block (Left) or follows it (Right)."""
    items = pairs_of(word)
    start, _ = _counter_span(items)
    heads = [j for j, it in enumerate(items) if it.barred]
    if len(heads) != 1:
        raise Malformed(Reason.NO_HEAD if not heads else Reason.MULTIPLE_HEADS)
    return BarSide.LEFT if heads[0] < start else BarSide.RIGHT


def decode(word: Sequence[DecoratedSymbol]) -> Union[DecodedView, NotACheckpoint]:
    """Invert :func:`encode_config`, or name the first violated invariant."""
    try:
        items = pairs_of(word)
        start, counter = _counter_span(items)
    except Malformed as exc:
        return NotACheckpoint(exc.reason, str(exc))
    stages = {it.stage for it in items}
    if len(stages) != 1:
        return NotACheckpoint(Reason.MIXED_STAGES, ",".join(sorted(s.short for s in stages)))
    ks = {it.k for it in items}
    if len(ks) != 1:
        return NotACheckpoint(Reason.MIXED_APPENDANT)
    if any(it.marked for it in items):
        return NotACheckpoint(Reason.MARKED_SYMBOL)
    heads = [j for j, it in enumerate(items) if it.barred]
    bits = len(items) - counter
    if len(heads) > 1:
        return NotACheckpoint(Reason.MULTIPLE_HEADS)
    if bits and not heads:
        return NotACheckpoint(Reason.NO_HEAD)
    if heads and heads[0] != 0:
        return NotACheckpoint(Reason.HEAD_NOT_FIRST)
    if counter & (counter - 1):
        return NotACheckpoint(Reason.COUNTER_NOT_POWER_OF_TWO, str(counter))
    if counter < bits:
        return NotACheckpoint(Reason.COUNTER_TOO_SMALL, f"{counter} <= {bits - 1}")
    dataword = "".join(it.base for it in items if it.base != A)
    cut = start - 1 if bits else 0
    return DecodedView(dataword, ks.pop(), counter, cut, stages.pop())
