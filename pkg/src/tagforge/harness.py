"""Lockstep verification of compiled systems and step-cost measurement.

A compiled system is run from checkpoint to checkpoint; each checkpoint is
decoded and compared with the cyclic interpreter's configuration, and the
counter invariants are checked on the way.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import random
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from tagforge.codec import HASH, BarSide, DecodedView, NotACheckpoint, encode_input
from tagforge.compiler import CompiledSystem, compile_cyclic
from tagforge.cyclic import CyclicTagSystem, crun
from tagforge.engine import BUDGET, CHECKPOINT, NO_RULE, Machine, Segment, symbol_name

BUDGET_SCALE = 32  # steps per unit of m(1+log2 m), about twice the largest measured ratio
DEFAULT_BUDGET_K = 64
CACHE_LIMIT = 200_000


class EncodingRejected(ValueError):
    pass


class CompilerBug(RuntimeError):
    pass


class InvariantFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Equivalent:
    kind: str = "Equivalent"


@dataclass(frozen=True)
class DivergedAt:
    step: int
    reason: str
    kind: str = "DivergedAt"


@dataclass(frozen=True)
class HaltMismatch:
    step: int
    detail: str
    kind: str = "HaltMismatch"


Verdict = Union[Equivalent, DivergedAt, HaltMismatch]


@dataclass(frozen=True)
class Invariants:
    power_of_two: bool
    exceeds_length: bool  # counter > index of the last bit
    within_double: bool  # counter <= 2 * longest dataword so far

    @property
    def ok(self) -> bool:
        return self.power_of_two and self.exceeds_length and self.within_double


@dataclass(frozen=True)
class StepRecord:
    step: int
    marker: int
    dataword: str  # reference configuration
    decoded_marker: int
    decoded_dataword: str
    counter: int
    bar_side: Optional[str]
    tag_steps: int  # 2-tag steps from the previous checkpoint
    invariants: Invariants

    def checkpoint_json(self) -> dict:
        return {
            "step": self.step,
            "appendant_index": self.decoded_marker,
            "dataword": self.decoded_dataword,
            "counter": self.counter,
            "bar_side": self.bar_side,
        }


@dataclass
class LockstepReport:
    program: Tuple[str, ...]
    input: str
    records: List[StepRecord]
    verdict: Verdict
    cyclic_halted: bool
    total_tag_steps: int

    @property
    def equivalent(self) -> bool:
        return isinstance(self.verdict, Equivalent)

    @property
    def invariant_violations(self) -> List[int]:
        return [r.step for r in self.records if not r.invariants.ok]

    def checkpoints_jsonl(self) -> str:
        return "".join(json.dumps(r.checkpoint_json(), sort_keys=True) + "\n" for r in self.records)

    def summary(self) -> dict:
        return {
            "program": list(self.program),
            "input": self.input,
            "verdict": asdict(self.verdict),
            "checkpoints": len(self.records),
            "cyclic_halted": self.cyclic_halted,
            "total_tag_steps": self.total_tag_steps,
        }


def budget_k() -> int:
    raw = os.environ.get("TAGFORGE_STEP_BUDGET_K")
    if not raw:
        return DEFAULT_BUDGET_K
    try:
        k = int(raw)
    except ValueError:
        raise ValueError(f"TAGFORGE_STEP_BUDGET_K must be an integer, got {raw!r}") from None
    if k < 1:
        raise ValueError("TAGFORGE_STEP_BUDGET_K must be positive")
    return k


def step_budget(length: int, counter: int, k: Optional[int] = None) -> int:
    m = length + counter
    return int(BUDGET_SCALE * m * (1 + math.log2(m)) * (budget_k() if k is None else k)) + 64


class Simulator:
    """A compiled program plus its integer machine and a segment cache.

    The cache maps an exact checkpoint word to the outcome of running it to
    the next checkpoint; the system is deterministic, so a hit is the same
    computation.
    """

    def __init__(self, program: Union[CyclicTagSystem, CompiledSystem], compiled_loop: bool = True, cache: bool = True):
        self.compiled = program if isinstance(program, CompiledSystem) else compile_cyclic(program)
        self.machine = Machine.from_compiled(self.compiled)
        self.compiled_loop = compiled_loop
        self._cache: Optional[Dict[bytes, tuple]] = {} if cache else None

    @property
    def program(self) -> CyclicTagSystem:
        return self.compiled.program

    def segment(self, word, budget: int) -> Tuple[Segment, Optional[Union[DecodedView, NotACheckpoint]]]:
        """Run ``word`` to the next checkpoint; the stop word is decoded when it is one."""
        key = word.tobytes() if self._cache is not None else None
        if key is not None:
            hit = self._cache.get(key)
            if hit is not None and hit[0].steps <= budget:
                return hit
        seg = self.machine.advance(word, budget, self.compiled_loop)
        out = (seg, self.machine.view(seg.word) if seg.status == CHECKPOINT else None)
        if key is not None and seg.status != BUDGET:
            if len(self._cache) >= CACHE_LIMIT:
                self._cache.clear()
            self._cache[key] = out
        return out


def _invariants(view: DecodedView, longest: int) -> Invariants:
    c = view.counter
    return Invariants(
        power_of_two=c > 0 and c & (c - 1) == 0,
        exceeds_length=c > view.length - 1,
        within_double=c <= 2 * longest,
    )


def lockstep_verify(
    program: Union[CyclicTagSystem, CompiledSystem, Simulator],
    word: str,
    max_steps: int,
    k: Optional[int] = None,
) -> LockstepReport:
    """Run the compiled system beside the cyclic interpreter for ``max_steps`` steps.

    Stops early when the cyclic dataword becomes empty. Raises
    :class:`EncodingRejected` for inputs shorter than the longest appendant
    and :class:`CompilerBug` when the 2-tag run breaks down structurally.
    """
    sim = program if isinstance(program, Simulator) else Simulator(program)
    cyc = sim.program
    if not word or any(ch not in "01" for ch in word):
        raise EncodingRejected(f"input must be a non-empty binary word, got {word!r}")
    if len(word) < cyc.max_appendant:
        raise EncodingRejected(f"input length {len(word)} is below the longest appendant ({cyc.max_appendant})")
    reference = crun(cyc, word, max_steps, detect_cycles=False).configs
    machine = sim.machine
    k = budget_k() if k is None else k
    current = machine.encode(encode_input(word, cyc.p))
    view = machine.view(current)
    records: List[StepRecord] = []
    longest = 0
    total = 0
    used = 0
    for i, expected in enumerate(reference):
        if isinstance(view, NotACheckpoint):
            raise CompilerBug(f"step {i}: word at a checkpoint does not decode ({view.reason.value}: {view.detail})")
        longest = max(longest, view.length, len(expected.dataword))
        # a decodable checkpoint has its head first, so the head is left of the counter
        side = BarSide.LEFT.value if view.dataword else None
        rec = StepRecord(i, expected.marker, expected.dataword, view.appendant_index, view.dataword, view.counter, side, used, _invariants(view, longest))
        records.append(rec)
        if (view.appendant_index, view.dataword) != (expected.marker, expected.dataword):
            reason = f"expected ({expected.marker}, {expected.dataword!r}), decoded ({view.appendant_index}, {view.dataword!r})"
            return LockstepReport(cyc.appendants, word, records, DivergedAt(i, reason), False, total)
        if not rec.invariants.ok:
            return LockstepReport(cyc.appendants, word, records, DivergedAt(i, f"counter invariant violated: {rec.invariants}"), False, total)
        if not expected.dataword:
            return LockstepReport(cyc.appendants, word, records, Equivalent(), True, total)
        if i == len(reference) - 1:
            break
        seg, view = sim.segment(current, step_budget(view.length, view.counter, k))
        if seg.status == NO_RULE and machine.symbols[seg.last_read].base == HASH:
            raise CompilerBug(f"step {i + 1}: hash symbol {symbol_name(machine, seg.last_read)} was read")
        if seg.status == BUDGET:
            raise CompilerBug(f"step {i + 1}: no checkpoint within {seg.steps} steps")
        if seg.status != CHECKPOINT:
            total += seg.steps
            return LockstepReport(cyc.appendants, word, records, HaltMismatch(i + 1, f"2-tag run halted ({seg.status_name}) before the cyclic step"), False, total)
        current = seg.word
        used = seg.steps
        total += seg.steps
    return LockstepReport(cyc.appendants, word, records, Equivalent(), False, total)


# --- cost measurement ------------------------------------------------------------


@dataclass(frozen=True)
class CostPoint:
    trial: int
    checkpoint_index: int  # index of the checkpoint the segment started from
    l: int
    counter: int
    steps: int

    @property
    def m(self) -> int:
        return self.l + self.counter

    @property
    def ratio(self) -> float:
        return self.steps / (self.m * math.log2(2 * self.m))


@dataclass
class CostProfile:
    points: List[CostPoint] = field(default_factory=list)

    @property
    def c_fit(self) -> float:
        return max((p.ratio for p in self.points), default=0.0)

    @property
    def total_steps(self) -> int:
        return sum(p.steps for p in self.points)

    @property
    def total_bound_units(self) -> float:
        return sum(p.m * math.log2(2 * p.m) for p in self.points)

    def csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["trial", "checkpoint_index", "l", "counter", "steps"])
        for p in self.points:
            w.writerow([p.trial, p.checkpoint_index, p.l, p.counter, p.steps])
        return out.getvalue()

    def summary(self) -> dict:
        return {
            "points": len(self.points),
            "c_fit": round(self.c_fit, 6),
            "total_steps": self.total_steps,
            "total_bound_units": round(self.total_bound_units, 3),
            "bound": "steps <= c_fit * m * log2(2m), m = dataword length + counter",
        }


def bench(
    program: Union[CyclicTagSystem, Simulator],
    inputs: Iterable[str],
    max_steps: int,
    repetitions: int = 1,
) -> CostProfile:
    """Measure 2-tag steps per simulated step over ``inputs``.

    Every trial must verify; a divergence or a counter invariant failure
    raises :class:`InvariantFailure` rather than producing a profile.
    """
    sim = program if isinstance(program, Simulator) else Simulator(program)
    profile = CostProfile()
    trial = 0
    for _ in range(repetitions):
        for word in inputs:
            report = lockstep_verify(sim, word, max_steps)
            if not report.equivalent:
                raise InvariantFailure(f"trial {trial} ({word!r}): {report.verdict}")
            recs = report.records
            for prev, nxt in zip(recs, recs[1:]):
                profile.points.append(CostPoint(trial, prev.step, len(prev.decoded_dataword), prev.counter, nxt.tag_steps))
            trial += 1
    return profile


def random_word(rng: random.Random, n: int) -> str:
    return "".join(rng.choice("01") for _ in range(n))


def family_inputs(family: str, seed: int, lengths: Sequence[int]) -> Tuple[CyclicTagSystem, List[str]]:
    """Benchmark families: ``a`` random inputs for a fixed program, ``b`` all-one
    appendants (counter doubling), ``c`` empty appendants (shrinking datawords)."""
    rng = random.Random(seed)
    if family == "a":
        prog = CyclicTagSystem(["00", "010", "11"])
    elif family == "b":
        prog = CyclicTagSystem(["1", "11", "111"])
    elif family == "c":
        prog = CyclicTagSystem(["", "", "1"])
    else:
        raise ValueError(f"unknown benchmark family {family!r}")
    return prog, [random_word(rng, n) for n in lengths]


# --- program suites ------------------------------------------------------------------


def canonical_programs(max_p: int = 3, max_len: int = 3, cap: int = 2000) -> List[CyclicTagSystem]:
    """Programs up to ``max_p`` appendants of length <= ``max_len``, one per rotation class.

    A rotated program started at marker 0 is the original started at another
    marker, and the compiler treats every marker alike, so only the least
    rotation is kept. Order: appendant count, total length, then lexicographic.
    """
    words = [""] + ["".join(t) for n in range(1, max_len + 1) for t in itertools.product("01", repeat=n)]
    found = []
    for p in range(1, max_p + 1):
        for combo in itertools.product(words, repeat=p):
            if min(combo[i:] + combo[:i] for i in range(p)) == combo:
                found.append(combo)
    found.sort(key=lambda c: (len(c), sum(map(len, c)), c))
    return [CyclicTagSystem(c) for c in found[:cap]]


def valid_inputs(program: CyclicTagSystem, max_len: int) -> Iterable[str]:
    """Every binary input from the longest appendant's length (at least 1) up to ``max_len``."""
    for n in range(max(1, program.max_appendant), max_len + 1):
        for t in itertools.product("01", repeat=n):
            yield "".join(t)


def random_trial(rng: random.Random, max_p: int = 6, max_len: int = 6, max_input: int = 24) -> Tuple[CyclicTagSystem, str]:
    p = rng.randint(1, max_p)
    prog = CyclicTagSystem([random_word(rng, rng.randint(0, max_len)) for _ in range(p)])
    n = rng.randint(max(1, prog.max_appendant), max_input)
    return prog, random_word(rng, n)
