"""Compile a cyclic tag system into a 2-tag system that simulates it.

One simulated step is a fixed pipeline of rounds, each round rewriting every
pair of the word into the next stage:

    CK -> D --(head 0)--------------------------------> PB1
            \\--(head 1)--> INJ -> CU1..CU4 (loop) -> CU5 -> CU6 -> CU7 -> PB1
    PB1..PB5 (loop) -> PB6 -> REP1 -> REP2 (/REP2R) -> MI -> CK

Control flow uses only the read symbol. Branches are taken by shifting the
read parity (a three-symbol output makes the next round read dotted
symbols); a hash symbol re-aligns the parity and is always deleted unread.

* PB1..PB6 move the head forward one pair: the unmarked bit pairs and the
  counter are halved alternately until the counter is odd, at which point
  only the pair after the head is still unmarked.
* INJ appends the marked appendant; CU1..CU7 halve counter and bit count in
  step to decide whether the counter must double to stay above the length.
* REP1/REP2 move the head back in front of the counter if it jumped over it,
  and MI advances every symbol's appendant index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from tagforge.codec import (
    HASH,
    A,
    DOTTED,
    ONE,
    PLAIN,
    THIRD,
    ZERO,
    DecoratedSymbol,
    Stage,
    hash_symbol,
    pair,
    render_symbol,
    triple,
)
from tagforge.cyclic import CyclicTagSystem, cvalidate
from tagforge.tag import TagSystem, validate

BITS = (ZERO, ONE)
Word = Tuple[DecoratedSymbol, ...]

STAGE_GRAPH: Mapping[Stage, FrozenSet[Stage]] = {
    Stage.CHECKPOINT: frozenset({Stage.DISPATCH}),
    Stage.DISPATCH: frozenset({Stage.PB1, Stage.INJECT}),
    Stage.INJECT: frozenset({Stage.FRESH, Stage.CU1}),
    Stage.FRESH: frozenset({Stage.CU1}),
    Stage.CU1: frozenset({Stage.CU2}),
    Stage.CU2: frozenset({Stage.CU3}),
    Stage.CU3: frozenset({Stage.CU4, Stage.CU5}),
    Stage.CU4: frozenset({Stage.CU1}),
    Stage.CU5: frozenset({Stage.CU6}),
    Stage.CU6: frozenset({Stage.CU7}),
    Stage.CU7: frozenset({Stage.PB1}),
    Stage.PB1: frozenset({Stage.PB2, Stage.PB6}),
    Stage.PB2: frozenset({Stage.PB3}),
    Stage.PB3: frozenset({Stage.PB4}),
    Stage.PB4: frozenset({Stage.PB5}),
    Stage.PB5: frozenset({Stage.PB1}),
    Stage.PB6: frozenset({Stage.REP1}),
    Stage.REP1: frozenset({Stage.REP2, Stage.REP2R}),
    Stage.REP2: frozenset({Stage.MARKER}),
    Stage.REP2R: frozenset({Stage.REP2, Stage.MARKER}),
    Stage.MARKER: frozenset({Stage.CHECKPOINT}),
}

PASSBAR_STAGES = (Stage.PB1, Stage.PB2, Stage.PB3, Stage.PB4, Stage.PB5, Stage.PB6)


class DuplicateRule(ValueError):
    pass


class RuleSet:
    """Rules plus the family each rule came from; refuses a second rule per symbol."""

    def __init__(self) -> None:
        self.rules: Dict[DecoratedSymbol, Word] = {}
        self.provenance: Dict[DecoratedSymbol, str] = {}

    def add(self, lhs: DecoratedSymbol, rhs: Iterable[DecoratedSymbol], family: str) -> None:
        if lhs in self.rules:
            raise DuplicateRule(f"{render_symbol(lhs)} already defined by {self.provenance[lhs]}")
        self.rules[lhs] = tuple(rhs)
        self.provenance[lhs] = family

    def update(self, other: "RuleSet") -> None:
        for lhs, rhs in other.rules.items():
            self.add(lhs, rhs, other.provenance[lhs])

    def __len__(self) -> int:
        return len(self.rules)


def sym(base: str, dot: int, stage: Stage, k: int, barred: bool = False, marked: bool = False) -> DecoratedSymbol:
    return DecoratedSymbol(base, dot, barred, marked, stage, k)


# --- standalone parity tester ----------------------------------------------------


def gen_parity_tester() -> TagSystem:
    """Six rules deciding the parity of ``x~ x:~ x1 ... xl`` in floor(|w|/2)+1 steps.

    Symbols are plain tokens: ``x~``/``x:~`` the barred pair, ``x`` a bit,
    ``x~1``/``x:~1`` the barred pair after one round, ``x2`` the even verdict.
    The run ends on the single symbol ``x:~1`` when |w| is odd and ``x2``
    when it is even.
    """
    rules = {}
    for x in BITS:
        rules[f"{x}~"] = (f"{x}~1", f"{x}:~1")
        rules[x] = ()
        rules[f"{x}~1"] = (f"{x}2",)
    return TagSystem.from_rules(rules, alphabet=[t for x in BITS for t in (f"{x}~", f"{x}:~", x, f"{x}~1", f"{x}:~1", f"{x}2")])


def parity_input(bits: str) -> Tuple[str, ...]:
    """Parity-tester word for ``bits``: the first bit as the barred pair, the rest plain."""
    if not bits:
        raise ValueError("need at least one bit")
    return (f"{bits[0]}~", f"{bits[0]}:~", *bits[1:])


def parity_verdict(symbol: str) -> str:
    if symbol.endswith(":~1"):
        return "odd"
    if symbol.endswith("2"):
        return "even"
    raise ValueError(f"not a parity-tester output symbol: {symbol!r}")


# --- head advance ----------------------------------------------------------------------


def gen_passbar_rules(p: int, stages: Sequence[Stage] = PASSBAR_STAGES) -> RuleSet:
    """Rules moving the head one pair forward, from ``stages[0]`` to ``stages[5]``.

    Entry word: head pair first, unmarked bit pairs and counter, read parity
    odd. Each iteration marks every second unmarked bit pair (stages 1-3)
    and every second counter pair (stages 4-5). Once the counter is odd the
    parity flips and stage 1 deletes the head, bars the one remaining
    unmarked bit pair and unmarks everything else.
    """
    s1, s2, s3, s4, s5, s6 = stages
    r = RuleSet()
    for k in range(p):
        fam = "passbar.stage1"
        for x in BITS:
            r.add(sym(x, PLAIN, s1, k, barred=True), pair(x, s2, k, barred=True), fam)
            r.add(sym(x, PLAIN, s1, k), triple(x, s2, k), fam)
            r.add(sym(x, PLAIN, s1, k, marked=True), pair(x, s2, k, marked=True), fam)
        r.add(sym(A, PLAIN, s1, k), pair(A, s2, k), fam)
        r.add(sym(A, PLAIN, s1, k, marked=True), pair(A, s2, k, marked=True), fam)

        fam = "passbar.detect"
        for x in BITS:
            r.add(sym(x, DOTTED, s1, k, barred=True), (hash_symbol(s6, k),), fam)
            r.add(sym(x, DOTTED, s1, k), pair(x, s6, k, barred=True), fam)
            r.add(sym(x, DOTTED, s1, k, marked=True), pair(x, s6, k), fam)
        r.add(sym(A, DOTTED, s1, k), pair(A, s6, k), fam)
        r.add(sym(A, DOTTED, s1, k, marked=True), pair(A, s6, k), fam)

        fam = "passbar.stage2"
        for x in BITS:
            r.add(sym(x, PLAIN, s2, k, barred=True), pair(x, s3, k, barred=True), fam)
            r.add(sym(x, PLAIN, s2, k), pair(x, s3, k), fam)
            r.add(sym(x, DOTTED, s2, k), pair(x, s3, k, marked=True), fam)
            r.add(sym(x, THIRD, s2, k), (), fam)
            for dot in (PLAIN, DOTTED):
                r.add(sym(x, dot, s2, k, marked=True), pair(x, s3, k, marked=True), fam)
        for dot in (PLAIN, DOTTED):
            r.add(sym(A, dot, s2, k), pair(A, s3, k), fam)
            r.add(sym(A, dot, s2, k, marked=True), pair(A, s3, k, marked=True), fam)

        fam = "passbar.stage3"
        for x in BITS:
            r.add(sym(x, PLAIN, s3, k, barred=True), pair(x, s4, k, barred=True), fam)
            r.add(sym(x, DOTTED, s3, k, barred=True), (hash_symbol(s4, k),) + pair(x, s4, k, barred=True), fam)
            for dot in (PLAIN, DOTTED):
                r.add(sym(x, dot, s3, k), pair(x, s4, k), fam)
                r.add(sym(x, dot, s3, k, marked=True), pair(x, s4, k, marked=True), fam)
        for dot in (PLAIN, DOTTED):
            r.add(sym(A, dot, s3, k), pair(A, s4, k), fam)
            r.add(sym(A, dot, s3, k, marked=True), pair(A, s4, k, marked=True), fam)

        fam = "passbar.stage4"
        for x in BITS:
            r.add(sym(x, PLAIN, s4, k, barred=True), pair(x, s5, k, barred=True), fam)
            r.add(sym(x, PLAIN, s4, k), pair(x, s5, k), fam)
            r.add(sym(x, PLAIN, s4, k, marked=True), pair(x, s5, k, marked=True), fam)
        r.add(sym(A, PLAIN, s4, k), triple(A, s5, k), fam)
        r.add(sym(A, PLAIN, s4, k, marked=True), pair(A, s5, k, marked=True), fam)

        fam = "passbar.stage5"
        for x in BITS:
            r.add(sym(x, PLAIN, s5, k, barred=True), pair(x, s1, k, barred=True), fam)
            for dot in (PLAIN, DOTTED):
                r.add(sym(x, dot, s5, k), pair(x, s1, k), fam)
                r.add(sym(x, dot, s5, k, marked=True), pair(x, s1, k, marked=True), fam)
        r.add(sym(A, PLAIN, s5, k), pair(A, s1, k), fam)
        r.add(sym(A, DOTTED, s5, k), pair(A, s1, k, marked=True), fam)
        r.add(sym(A, THIRD, s5, k), (), fam)
        for dot in (PLAIN, DOTTED):
            r.add(sym(A, dot, s5, k, marked=True), pair(A, s1, k, marked=True), fam)
    return r


# --- appending and counter maintenance -------------------------------------------------


def gen_append_rules(program: CyclicTagSystem) -> RuleSet:
    """Rules appending the marked appendant behind a ``1`` head and fixing the counter.

    Entry: stage INJ word with head ``1``, read parity odd. Exit: stage PB1
    word with the appendant's pairs at the end and the counter doubled iff
    the new bit count reached it.

    CU1/CU2 halve the unmarked counter pairs (second of each two marked),
    CU3/CU4 floor-halve the unmarked bit pairs (first of each two marked).
    A bit-triple count that is odd leaves CU1 reading dotted symbols; its
    head rule emits a hash to re-align. When the counter reaches one, CU2
    ends on the dotted side and CU3's head rule exits to CU5. There at most
    one bit pair is unmarked; CU5/CU6 turn it into a parity flip that CU7
    answers by doubling every counter pair.
    """
    p = program.p
    r = RuleSet()
    for k in range(p):
        fam = "append.inject"
        fresh: List[DecoratedSymbol] = []
        for bit in program.appendants[k]:
            fresh.extend(pair(bit, Stage.FRESH, k))
        r.add(sym(ONE, PLAIN, Stage.INJECT, k, barred=True), tuple(fresh) + pair(ONE, Stage.CU1, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, PLAIN, Stage.INJECT, k), pair(x, Stage.CU1, k), fam)
            r.add(sym(x, PLAIN, Stage.FRESH, k), pair(x, Stage.CU1, k), "append.fresh")
        r.add(sym(A, PLAIN, Stage.INJECT, k), pair(A, Stage.CU1, k), fam)

        fam = "append.cu1"
        cu1, cu2 = Stage.CU1, Stage.CU2
        r.add(sym(ONE, PLAIN, cu1, k, barred=True), pair(ONE, cu2, k, barred=True), fam)
        r.add(sym(ONE, DOTTED, cu1, k, barred=True), (hash_symbol(cu2, k),) + pair(ONE, cu2, k, barred=True), fam)
        for dot in (PLAIN, DOTTED):
            for x in BITS:
                r.add(sym(x, dot, cu1, k), pair(x, cu2, k), fam)
                r.add(sym(x, dot, cu1, k, marked=True), pair(x, cu2, k, marked=True), fam)
            r.add(sym(A, dot, cu1, k), triple(A, cu2, k), fam)
            r.add(sym(A, dot, cu1, k, marked=True), pair(A, cu2, k, marked=True), fam)

        fam = "append.cu2"
        cu3 = Stage.CU3
        r.add(sym(ONE, PLAIN, cu2, k, barred=True), pair(ONE, cu3, k, barred=True), fam)
        r.add(sym(A, PLAIN, cu2, k), pair(A, cu3, k), fam)
        r.add(sym(A, DOTTED, cu2, k), pair(A, cu3, k, marked=True), fam)
        r.add(sym(A, THIRD, cu2, k), (), fam)
        for dot in (PLAIN, DOTTED):
            for x in BITS:
                r.add(sym(x, dot, cu2, k), pair(x, cu3, k), fam)
                r.add(sym(x, dot, cu2, k, marked=True), pair(x, cu3, k, marked=True), fam)
            r.add(sym(A, dot, cu2, k, marked=True), pair(A, cu3, k, marked=True), fam)

        fam = "append.cu3"
        cu4, cu5 = Stage.CU4, Stage.CU5
        r.add(sym(ONE, PLAIN, cu3, k, barred=True), pair(ONE, cu4, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, PLAIN, cu3, k), triple(x, cu4, k), fam)
            r.add(sym(x, PLAIN, cu3, k, marked=True), pair(x, cu4, k, marked=True), fam)
        r.add(sym(A, PLAIN, cu3, k), pair(A, cu4, k), fam)
        r.add(sym(A, PLAIN, cu3, k, marked=True), pair(A, cu4, k, marked=True), fam)
        fam = "append.cu3-exit"
        r.add(sym(ONE, DOTTED, cu3, k, barred=True), (hash_symbol(cu5, k),) + pair(ONE, cu5, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, DOTTED, cu3, k), pair(x, cu5, k), fam)
            r.add(sym(x, DOTTED, cu3, k, marked=True), pair(x, cu5, k, marked=True), fam)
        r.add(sym(A, DOTTED, cu3, k), pair(A, cu5, k), fam)
        r.add(sym(A, DOTTED, cu3, k, marked=True), pair(A, cu5, k, marked=True), fam)

        fam = "append.cu4"
        r.add(sym(ONE, PLAIN, cu4, k, barred=True), pair(ONE, cu1, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, PLAIN, cu4, k), pair(x, cu1, k, marked=True), fam)
            r.add(sym(x, DOTTED, cu4, k), pair(x, cu1, k), fam)
            r.add(sym(x, THIRD, cu4, k), (), fam)
            for dot in (PLAIN, DOTTED):
                r.add(sym(x, dot, cu4, k, marked=True), pair(x, cu1, k, marked=True), fam)
        for dot in (PLAIN, DOTTED):
            r.add(sym(A, dot, cu4, k), pair(A, cu1, k), fam)
            r.add(sym(A, dot, cu4, k, marked=True), pair(A, cu1, k, marked=True), fam)

        fam = "append.cu5"
        cu6, cu7 = Stage.CU6, Stage.CU7
        r.add(sym(ONE, PLAIN, cu5, k, barred=True), pair(ONE, cu6, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, PLAIN, cu5, k), triple(x, cu6, k), fam)
            r.add(sym(x, PLAIN, cu5, k, marked=True), pair(x, cu6, k, marked=True), fam)
        r.add(sym(A, PLAIN, cu5, k), pair(A, cu6, k), fam)
        r.add(sym(A, PLAIN, cu5, k, marked=True), pair(A, cu6, k), fam)

        fam = "append.cu6"
        r.add(sym(ONE, PLAIN, cu6, k, barred=True), pair(ONE, cu7, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, PLAIN, cu6, k), pair(x, cu7, k), fam)
            r.add(sym(x, THIRD, cu6, k), (), fam)
            for dot in (PLAIN, DOTTED):
                r.add(sym(x, dot, cu6, k, marked=True), pair(x, cu7, k), fam)
        for dot in (PLAIN, DOTTED):
            r.add(sym(A, dot, cu6, k), pair(A, cu7, k), fam)

        fam = "append.keep"
        pb1 = Stage.PB1
        r.add(sym(ONE, PLAIN, cu7, k, barred=True), pair(ONE, pb1, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, PLAIN, cu7, k), pair(x, pb1, k), fam)
        r.add(sym(A, PLAIN, cu7, k), pair(A, pb1, k), fam)
        fam = "append.double"
        r.add(sym(ONE, DOTTED, cu7, k, barred=True), (hash_symbol(pb1, k),) + pair(ONE, pb1, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, DOTTED, cu7, k), pair(x, pb1, k), fam)
        r.add(sym(A, DOTTED, cu7, k), pair(A, pb1, k) + pair(A, pb1, k), fam)
    return r


# --- glue: dispatch, reposition, marker ----------------------------------------------


def gen_dispatch_rules(p: int) -> RuleSet:
    """Route a checkpoint word on its head bit.

    A ``0`` head is copied as a pair, so the next round reads plain symbols
    and enters the head advance directly. A ``1`` head becomes a barred
    triple, so the next round reads dotted symbols and enters INJ.
    """
    r = RuleSet()
    ck, d = Stage.CHECKPOINT, Stage.DISPATCH
    for k in range(p):
        fam = "dispatch.mark"
        r.add(sym(ZERO, PLAIN, ck, k, barred=True), pair(ZERO, d, k, barred=True), fam)
        r.add(sym(ONE, PLAIN, ck, k, barred=True), triple(ONE, d, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, PLAIN, ck, k), pair(x, d, k), fam)
        r.add(sym(A, PLAIN, ck, k), pair(A, d, k), fam)

        fam = "dispatch.skip-append"
        r.add(sym(ZERO, PLAIN, d, k, barred=True), pair(ZERO, Stage.PB1, k, barred=True), fam)
        for x in BITS:
            r.add(sym(x, PLAIN, d, k), pair(x, Stage.PB1, k), fam)
        r.add(sym(A, PLAIN, d, k), pair(A, Stage.PB1, k), fam)

        fam = "dispatch.to-append"
        r.add(sym(ONE, PLAIN, d, k, barred=True), (hash_symbol(Stage.INJECT, k),) + pair(ONE, Stage.INJECT, k, barred=True), fam)
        r.add(sym(ONE, THIRD, d, k, barred=True), (), fam)
        for x in BITS:
            r.add(sym(x, DOTTED, d, k), pair(x, Stage.INJECT, k), fam)
        r.add(sym(A, DOTTED, d, k), pair(A, Stage.INJECT, k), fam)
    return r


def gen_reposition_rules(p: int) -> RuleSet:
    """Bring the head back in front of the counter.

    PB6 lengthens the head to three symbols. In the following REP1 round
    everything after the head is read dotted, so counter pairs read plain
    lie before the head (it jumped over the counter). Those go to REP2R and
    are read a second time during REP2, which moves the round boundary to
    the head. A bare counter (empty dataword) passes straight through.
    """
    r = RuleSet()
    for k in range(p):
        fam = "reposition.lengthen"
        for x in BITS:
            r.add(sym(x, PLAIN, Stage.PB6, k, barred=True), triple(x, Stage.REP1, k, barred=True), fam)
            r.add(sym(x, PLAIN, Stage.PB6, k), pair(x, Stage.REP1, k), fam)
        r.add(sym(A, PLAIN, Stage.PB6, k), pair(A, Stage.REP1, k), fam)

        fam = "reposition.probe"
        for x in BITS:
            r.add(sym(x, PLAIN, Stage.REP1, k, barred=True), pair(x, Stage.REP2, k, barred=True), fam)
            r.add(sym(x, THIRD, Stage.REP1, k, barred=True), (hash_symbol(Stage.REP2, k),), fam)
            r.add(sym(x, DOTTED, Stage.REP1, k), pair(x, Stage.REP2, k), fam)
        r.add(sym(A, DOTTED, Stage.REP1, k), pair(A, Stage.REP2, k), fam)
        r.add(sym(A, PLAIN, Stage.REP1, k), pair(A, Stage.REP2R, k), fam)

        fam = "reposition.settle"
        for x in BITS:
            r.add(sym(x, DOTTED, Stage.REP2, k, barred=True), pair(x, Stage.MARKER, k, barred=True), fam)
            r.add(sym(x, PLAIN, Stage.REP2, k), pair(x, Stage.MARKER, k), fam)
        r.add(sym(A, PLAIN, Stage.REP2, k), pair(A, Stage.MARKER, k), fam)
        r.add(sym(A, DOTTED, Stage.REP2R, k), pair(A, Stage.REP2, k), "reposition.reread")
        r.add(sym(A, PLAIN, Stage.REP2R, k), pair(A, Stage.MARKER, k), "reposition.empty")
    return r


def gen_marker_rules(p: int) -> RuleSet:
    """One round rewriting appendant index k to (k+1) mod p, entering the checkpoint stage."""
    r = RuleSet()
    for k in range(p):
        nk = (k + 1) % p
        fam = "marker.increment"
        for x in BITS:
            r.add(sym(x, PLAIN, Stage.MARKER, k, barred=True), pair(x, Stage.CHECKPOINT, nk, barred=True), fam)
            r.add(sym(x, PLAIN, Stage.MARKER, k), pair(x, Stage.CHECKPOINT, nk), fam)
        r.add(sym(A, PLAIN, Stage.MARKER, k), pair(A, Stage.CHECKPOINT, nk), fam)
    return r


# --- whole program ----------------------------------------------------------------------


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class CompiledSystem:
    system: TagSystem
    program: CyclicTagSystem
    q: int  # symbols per appendant index
    provenance: Mapping[DecoratedSymbol, str]
    stage_graph: Mapping[Stage, FrozenSet[Stage]] = field(default_factory=lambda: STAGE_GRAPH)
    checkpoint: Stage = Stage.CHECKPOINT

    @property
    def p(self) -> int:
        return self.program.p

    @property
    def max_appendant(self) -> int:
        return self.program.max_appendant

    def render(self) -> str:
        from tagforge.tag import format_2tag

        header = [
            "2-tag system compiled from cyclic tag program " + ",".join(a or "-" for a in self.program.appendants),
            f"p={self.p} q={self.q} alphabet={len(self.system.alphabet)} rules={len(self.system.rules)}",
        ]
        return format_2tag(self.system, render_symbol, header)

    def metadata(self) -> dict:
        return {
            "appendants": list(self.program.appendants),
            "p": self.p,
            "q": self.q,
            "alphabet_size": len(self.system.alphabet),
            "rule_count": len(self.system.rules),
            "checkpoint_stage": self.checkpoint.short,
            "max_appendant": self.max_appendant,
            "stage_graph": {s.short: sorted(t.short for t in succ) for s, succ in self.stage_graph.items()},
            "provenance": {render_symbol(s): fam for s, fam in self.provenance.items()},
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n"


def _unindexed(s: DecoratedSymbol) -> tuple:
    return s[:5]


def stage_closure_violations(rules: Mapping[DecoratedSymbol, Sequence[DecoratedSymbol]], graph=STAGE_GRAPH) -> List[str]:
    out = []
    for lhs, rhs in rules.items():
        allowed = graph.get(lhs.stage, frozenset())
        for s in rhs:
            if s.stage not in allowed:
                out.append(f"{render_symbol(lhs)} -> {render_symbol(s)}")
    return out


def compile_cyclic(program: CyclicTagSystem) -> CompiledSystem:
    problems = cvalidate(program)
    if problems:
        raise CompileError(f"invalid cyclic tag system: {problems}")
    p = program.p
    rules = RuleSet()
    rules.update(gen_dispatch_rules(p))
    rules.update(gen_append_rules(program))
    rules.update(gen_passbar_rules(p))
    rules.update(gen_reposition_rules(p))
    rules.update(gen_marker_rules(p))

    # fresh pairs of both bits belong to the alphabet whether or not an appendant uses them
    shapes = {_unindexed(s) for x in BITS for s in pair(x, Stage.FRESH, 0)}
    for lhs, rhs in rules.rules.items():
        shapes.add(_unindexed(lhs))
        shapes.update(_unindexed(s) for s in rhs)
    shapes = sorted(shapes, key=lambda t: (t[4], t[0], t[1], t[2], t[3]))
    alphabet = frozenset(DecoratedSymbol(*shape, k) for shape in shapes for k in range(p))
    system = TagSystem(rules=dict(rules.rules), alphabet=alphabet)

    bad = validate(system) + stage_closure_violations(system.rules)
    if bad:
        raise CompileError(f"construction produced an invalid system: {bad[:5]}")
    return CompiledSystem(system=system, program=program, q=len(shapes), provenance=dict(rules.provenance))


# --- running one rule family --------------------------------------------------------------


@dataclass
class PhaseRun:
    word: Word
    steps: int
    reads: List[DecoratedSymbol]
    reached: bool


def run_phase(
    rules: Mapping[DecoratedSymbol, Sequence[DecoratedSymbol]],
    word: Sequence[DecoratedSymbol],
    target: Stage,
    max_steps: int = 1_000_000,
) -> PhaseRun:
    """Step ``rules`` from ``word`` until every symbol is at stage ``target``.

    Stops early (``reached`` false) on a missing rule, a short word or the
    step limit. The read symbols are returned for counting rounds.
    """
    from collections import deque

    w = deque(word)
    reads: List[DecoratedSymbol] = []
    pending = sum(1 for s in w if s.stage != target or s.base == HASH)
    n = 0
    while n < max_steps and len(w) >= 2:
        s = w[0]
        rhs = rules.get(s)
        if rhs is None:
            break
        pending -= (s.stage != target or s.base == HASH) + (w[1].stage != target or w[1].base == HASH)
        w.popleft()
        w.popleft()
        w.extend(rhs)
        pending += sum(1 for t in rhs if t.stage != target or t.base == HASH)
        reads.append(s)
        n += 1
        if pending == 0:
            return PhaseRun(tuple(w), n, reads, True)
    return PhaseRun(tuple(w), n, reads, False)
