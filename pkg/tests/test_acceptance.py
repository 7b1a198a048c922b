"""Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
The lines are repeated in the "acceptance criteria" section of the run summary.
"""
from __future__ import annotations

import math
import random
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import CRITERION_LINES  # noqa: E402
from lemma_forms import append_cases, check_append, check_passbar, passbar_cases  # noqa: E402
from tagforge.compiler import gen_parity_tester, parity_input, parity_verdict  # noqa: E402
from tagforge.cyclic import CyclicTagSystem, crun  # noqa: E402
from tagforge.harness import (  # noqa: E402
    Simulator,
    bench,
    canonical_programs,
    family_inputs,
    lockstep_verify,
    random_trial,
    valid_inputs,
)
from tagforge.tag import run  # noqa: E402

# pinned tolerances and sizes
EXAMPLE_TIME_LIMIT = 1e-3  # seconds
PARITY_TIME_LIMIT = 1.0
SWEEP_TIME_LIMIT = 600.0
EXHAUSTIVE_CAP = 2000
EXHAUSTIVE_STEPS = 25
EXHAUSTIVE_MAX_INPUT = 8
RANDOM_TRIALS = 1000
RANDOM_STEPS = 100
RANDOM_SEED = 20240601
BENCH_LENGTHS = [8, 16, 32, 64, 128]
BENCH_SEED = 0
BENCH_STEPS = 100
BENCH_TIME_LIMIT = 300.0
C_FIT_FROZEN = 14.9625  # first measured c_fit of family (a) with the settings above
C_FIT_SLACK = 0.10


def report(n: int, ok: bool, detail: str) -> None:
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}"
    CRITERION_LINES.append(line)
    print(line)


@dataclass
class Sweep:
    trials: int = 0
    checkpoints: int = 0
    failures: List[str] = field(default_factory=list)
    invariant_breaks: List[str] = field(default_factory=list)
    elapsed: float = 0.0

    def add(self, rep) -> None:
        self.trials += 1
        self.checkpoints += len(rep.records)
        key = f"{','.join(a or '-' for a in rep.program)} / {rep.input}"
        if not rep.equivalent:
            self.failures.append(f"{key}: {rep.verdict}")
        for r in rep.records:
            inv = r.invariants
            if not inv.ok:
                self.invariant_breaks.append(f"{key} step {r.step}: {inv}")


_sweeps = {}


def exhaustive_sweep() -> Sweep:
    if "exhaustive" not in _sweeps:
        sweep = Sweep()
        t0 = time.perf_counter()
        for prog in canonical_programs(3, 3, EXHAUSTIVE_CAP):
            sim = Simulator(prog)
            for word in valid_inputs(prog, EXHAUSTIVE_MAX_INPUT):
                sweep.add(lockstep_verify(sim, word, EXHAUSTIVE_STEPS))
        sweep.elapsed = time.perf_counter() - t0
        _sweeps["exhaustive"] = sweep
    return _sweeps["exhaustive"]


def random_sweep() -> Sweep:
    if "random" not in _sweeps:
        sweep = Sweep()
        rng = random.Random(RANDOM_SEED)
        t0 = time.perf_counter()
        for _ in range(RANDOM_TRIALS):
            prog, word = random_trial(rng, 6, 6, 24)
            sweep.add(lockstep_verify(prog, word, RANDOM_STEPS))
        sweep.elapsed = time.perf_counter() - t0
        _sweeps["random"] = sweep
    return _sweeps["random"]


def test_criterion_1_paper_example():
    prog = CyclicTagSystem(["00", "010", "11"])
    timings = []
    for _ in range(20):
        t0 = time.perf_counter()
        res = crun(prog, "011", 4)
        timings.append(time.perf_counter() - t0)
    words = [c.dataword for c in res.configs]
    markers = [c.marker for c in res.configs]
    ok = words == ["011", "11", "1010", "01011", "1011"] and markers == [0, 1, 2, 0, 1] and min(timings) < EXAMPLE_TIME_LIMIT
    report(1, ok, f"datawords {'->'.join(words)}, markers {markers}, {min(timings) * 1e6:.0f} us")
    assert ok


def test_criterion_2_parity_tester_timing():
    ts = gen_parity_tester()
    rng = random.Random(2)
    bad = []
    t0 = time.perf_counter()
    for n in range(2, 65):
        for lead in "01":
            bits = lead + "".join(rng.choice("01") for _ in range(n - 2))
            res = run(ts, parity_input(bits))
            want = "odd" if n % 2 else "even"
            if res.steps != n // 2 + 1 or len(res.word) != 1 or parity_verdict(res.word[0]) != want:
                bad.append((n, lead, res.steps))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < PARITY_TIME_LIMIT
    report(2, ok, f"126 words |w| in [2,64], {len(bad)} wrong, {elapsed * 1e3:.1f} ms")
    assert ok


def test_criterion_3_exhaustive_lockstep():
    sweep = exhaustive_sweep()
    ok = not sweep.failures and not sweep.invariant_breaks and sweep.elapsed < SWEEP_TIME_LIMIT
    report(
        3,
        ok,
        f"{len(canonical_programs(3, 3, EXHAUSTIVE_CAP))} programs, {sweep.trials} runs, {sweep.checkpoints} checkpoints, "
        f"{len(sweep.failures)} non-equivalent, {len(sweep.invariant_breaks)} invariant breaks, {sweep.elapsed:.0f} s",
    )
    assert not sweep.failures, sweep.failures[:5]
    assert ok


def test_criterion_4_random_lockstep():
    sweep = random_sweep()
    ok = sweep.trials == RANDOM_TRIALS and not sweep.failures and sweep.elapsed < SWEEP_TIME_LIMIT
    report(4, ok, f"{sweep.trials} random trials (seed {RANDOM_SEED}), {sweep.checkpoints} checkpoints, {len(sweep.failures)} non-equivalent, {sweep.elapsed:.0f} s")
    assert not sweep.failures, sweep.failures[:5]
    assert ok


def test_criterion_5_counter_invariants():
    sweeps = [exhaustive_sweep(), random_sweep()]
    checked = sum(s.checkpoints for s in sweeps)
    breaks = [b for s in sweeps for b in s.invariant_breaks]
    ok = not breaks and checked > 0
    report(5, ok, f"{checked} checkpoints: power of two, > last bit index, <= 2x longest dataword; {len(breaks)} violations")
    assert ok, breaks[:5]


def test_criterion_6_step_cost_bound():
    prog, inputs = family_inputs("a", BENCH_SEED, BENCH_LENGTHS)
    t0 = time.perf_counter()
    profile = bench(prog, inputs, BENCH_STEPS)
    elapsed = time.perf_counter() - t0
    limit = C_FIT_FROZEN * (1 + C_FIT_SLACK)
    cumulative_ok = profile.total_steps <= profile.c_fit * profile.total_bound_units
    ok = profile.c_fit <= limit and cumulative_ok and elapsed < BENCH_TIME_LIMIT
    report(6, ok, f"max steps/(m log2 2m) = {profile.c_fit:.4f} over {len(profile.points)} steps (frozen {C_FIT_FROZEN}, limit {limit:.4f}), {elapsed:.1f} s")
    assert ok


def test_criterion_7_lemma_contracts():
    failures = []
    n_pb = n_ap = 0
    for case in passbar_cases():
        n_pb += 1
        if check_passbar(*case):
            failures.append(("advance", case, check_passbar(*case)))
    for case in append_cases():
        n_ap += 1
        if check_append(*case):
            failures.append(("append", case, check_append(*case)))
    ok = not failures
    report(7, ok, f"{n_pb} head-advance and {n_ap} append lemma-form inputs (l <= 8, all cuts, counters P, 2P, 4P); {len(failures)} mismatches")
    assert ok, failures[:5]


def test_criterion_8_scope_of_complexity_claim():
    # The Turing-machine-level bound needs a TM-to-cyclic compiler, which this
    # package does not contain; only the 2-tag-over-cyclic factor is measured.
    prog, inputs = family_inputs("a", BENCH_SEED, [8, 16])
    profile = bench(prog, inputs, 20)
    summary = profile.summary()
    documented = "m * log2(2m)" in summary["bound"]
    per_step = all(p.steps <= profile.c_fit * p.m * math.log2(2 * p.m) + 1e-9 for p in profile.points)
    ok = documented and per_step
    report(8, ok, "TM-level O(t^4 (log t)^2) bound not reproducible here (no TM compiler); bench reports only the per-step m log m factor")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
