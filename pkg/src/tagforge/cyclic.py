"""Cyclic tag systems: a list of binary appendants cycled by a marker."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

from tagforge._cycles import DEFAULT_MEMORY_CAP, CycleMonitor
from tagforge.tag import HaltReason, ParseError

EMPTY_DATAWORD = "EmptyDataword"


@dataclass(frozen=True)
class EmptyProgram:
    pass


@dataclass(frozen=True)
class NonBinarySymbol:
    index: int
    appendant: str


CyclicViolation = Union[EmptyProgram, NonBinarySymbol]


@dataclass(frozen=True)
class CyclicTagSystem:
    appendants: Tuple[str, ...]

    def __init__(self, appendants: Sequence[str]):
        object.__setattr__(self, "appendants", tuple(appendants))

    @property
    def p(self) -> int:
        return len(self.appendants)

    @property
    def max_appendant(self) -> int:
        return max((len(a) for a in self.appendants), default=0)


class CyclicConfig(NamedTuple):
    marker: int
    dataword: str


@dataclass
class CyclicRun:
    configs: List[CyclicConfig]  # every configuration visited, initial first
    halt: str  # EMPTY_DATAWORD, or HaltReason.CYCLE / HaltReason.STEP_LIMIT value
    steps: int
    cycle_entry: Optional[int] = None
    cycle_period: Optional[int] = None

    @property
    def final(self) -> CyclicConfig:
        return self.configs[-1]


def cvalidate(c: CyclicTagSystem) -> List[CyclicViolation]:
    violations: List[CyclicViolation] = []
    if not c.appendants:
        violations.append(EmptyProgram())
    for i, a in enumerate(c.appendants):
        if any(ch not in "01" for ch in a):
            violations.append(NonBinarySymbol(i, a))
    return violations


def cstep(c: CyclicTagSystem, cfg: CyclicConfig) -> Optional[CyclicConfig]:
    """One computation step, or None when the dataword is empty (halted)."""
    k, w = cfg
    if not w:
        return None
    tail = w[1:] + c.appendants[k] if w[0] == "1" else w[1:]
    return CyclicConfig((k + 1) % len(c.appendants), tail)


def crun(
    c: CyclicTagSystem,
    word: str,
    max_steps: int,
    detect_cycles: bool = True,
    cycle_memory: int = DEFAULT_MEMORY_CAP,
    marker: int = 0,
) -> CyclicRun:
    cfg = CyclicConfig(marker % c.p, word)
    configs = [cfg]
    monitor = CycleMonitor(lambda s: cstep(c, s), cycle_memory) if detect_cycles else None
    if monitor is not None:
        monitor.observe(cfg, 0)
    n = 0
    while True:
        if not cfg.dataword:
            return CyclicRun(configs, EMPTY_DATAWORD, n)
        if n >= max_steps:
            return CyclicRun(configs, HaltReason.STEP_LIMIT.value, n)
        cfg = cstep(c, cfg)
        n += 1
        configs.append(cfg)
        if monitor is not None:
            hit = monitor.observe(cfg, n)
            if hit is not None:
                first = hit.entry + hit.period
                del configs[first + 1:]
                return CyclicRun(configs, HaltReason.CYCLE.value, first, hit.entry, hit.period)


def parse_ctag(text: str) -> CyclicTagSystem:
    """Parse ``.ctag``: first line is comma-separated appendants, ``-`` is the empty word."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError(1, "missing appendant list")
    appendants = []
    for item in lines[0].split(","):
        item = item.strip()
        if item == "-":
            appendants.append("")
            continue
        if not item:
            raise ParseError(1, "empty appendant must be written '-'")
        if any(ch not in "01" for ch in item):
            raise ParseError(1, f"appendant {item!r} is not a binary word")
        appendants.append(item)
    return CyclicTagSystem(appendants)


def format_ctag(c: CyclicTagSystem) -> str:
    return ",".join(a if a else "-" for a in c.appendants) + "\n"
