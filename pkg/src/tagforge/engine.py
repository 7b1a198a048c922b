"""Integer-coded 2-tag execution for compiled systems.

Symbols are interned to small integers and rules stored as flat arrays, so a
run between two checkpoints is a tight loop over a ring-free buffer with a
moving head. The loop is compiled with numba; :func:`run_to_checkpoint_py`
is the same loop in plain Python and serves as its cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numba
import numpy as np

from tagforge.codec import A, HASH, DecodedView, DecoratedSymbol, NotACheckpoint, Stage, decode, render_symbol

CHECKPOINT, WORD_TOO_SHORT, NO_RULE, BUDGET, NEED_SPACE = 0, 1, 2, 3, 4
STATUS_NAMES = {CHECKPOINT: "Checkpoint", WORD_TOO_SHORT: "WordTooShort", NO_RULE: "NoRuleForReadSymbol", BUDGET: "BudgetExhausted"}

DTYPE = np.int32


@numba.njit(cache=True)
def _kernel(buf, head, tail, rule_start, rule_len, rule_data, off_ck, budget):
    """Step until every symbol is at the checkpoint stage (after >= 1 step).

    Returns (status, head, tail, steps, last_read). ``off_ck[s]`` is 1 for
    symbols outside the checkpoint stage; their count is kept incrementally.
    """
    cap = buf.shape[0]
    pending = 0
    for j in range(head, tail):
        pending += off_ck[buf[j]]
    steps = 0
    last = -1
    while True:
        if tail - head < 2:
            return WORD_TOO_SHORT, head, tail, steps, last
        s = buf[head]
        n = rule_len[s]
        if n < 0:
            return NO_RULE, head, tail, steps, s
        if steps >= budget:
            return BUDGET, head, tail, steps, last
        if tail + n > cap:
            if head >= n and tail - head + n <= cap:
                size = tail - head
                for j in range(size):
                    buf[j] = buf[head + j]
                head = 0
                tail = size
            else:
                return NEED_SPACE, head, tail, steps, last
        pending -= off_ck[s] + off_ck[buf[head + 1]]
        head += 2
        start = rule_start[s]
        for j in range(n):
            t = rule_data[start + j]
            buf[tail + j] = t
            pending += off_ck[t]
        tail += n
        steps += 1
        last = s
        if pending == 0:
            return CHECKPOINT, head, tail, steps, last


@numba.njit(cache=True)
def _view_kernel(word, base, dot, bar, mark, stage, kk, bits_out):
    """Fast acceptance test for checkpoint words.

    Returns (ok, k, counter, cut, nbits, stage); on ok the dataword bits are
    in ``bits_out[:nbits]``. Any failure is re-diagnosed by the slow decoder.
    """
    n = word.shape[0]
    if n == 0 or n % 2:
        return False, 0, 0, 0, 0, 0
    st0 = stage[word[0]]
    k0 = kk[word[0]]
    heads = 0
    head_at = -1
    start = -1
    counter = 0
    ended = False
    nbits = 0
    for j in range(0, n, 2):
        u = word[j]
        v = word[j + 1]
        if base[u] == 3 or base[v] == 3:
            return False, 0, 0, 0, 0, 0
        if dot[u] != 0 or dot[v] != 1 or base[u] != base[v] or bar[u] != bar[v] or mark[u] != mark[v]:
            return False, 0, 0, 0, 0, 0
        if stage[u] != stage[v] or kk[u] != kk[v] or stage[u] != st0 or kk[u] != k0 or mark[u]:
            return False, 0, 0, 0, 0, 0
        if base[u] == 2:
            if ended or bar[u]:
                return False, 0, 0, 0, 0, 0
            if start < 0:
                start = j // 2
            counter += 1
        else:
            if start >= 0:
                ended = True
            if bar[u]:
                heads += 1
                head_at = j // 2
            bits_out[nbits] = base[u]
            nbits += 1
    if counter == 0 or heads > 1 or (nbits > 0 and (heads == 0 or head_at != 0)):
        return False, 0, 0, 0, 0, 0
    if counter & (counter - 1) or counter < nbits:
        return False, 0, 0, 0, 0, 0
    cut = start - 1 if nbits > 0 else 0
    return True, k0, counter, cut, nbits, st0


def run_to_checkpoint_py(buf, head, tail, rule_start, rule_len, rule_data, off_ck, budget):
    """Pure-Python twin of the compiled kernel (identical contract)."""
    return _kernel.py_func(buf, head, tail, rule_start, rule_len, rule_data, off_ck, budget)


@dataclass(frozen=True)
class Segment:
    """Outcome of running from one checkpoint toward the next."""

    status: int
    word: np.ndarray  # word at the stop point
    steps: int
    last_read: int

    @property
    def status_name(self) -> str:
        return STATUS_NAMES[self.status]


class Machine:
    """A compiled 2-tag system in integer form."""

    def __init__(self, rules, alphabet, checkpoint: Stage = Stage.CHECKPOINT):
        symbols = sorted(alphabet, key=render_symbol)
        self.symbols: List[DecoratedSymbol] = symbols
        self.index: Dict[DecoratedSymbol, int] = {s: i for i, s in enumerate(symbols)}
        n = len(symbols)
        self.rule_len = np.full(n, -1, dtype=np.int64)
        self.rule_start = np.zeros(n, dtype=np.int64)
        data: List[int] = []
        for s, rhs in rules.items():
            i = self.index[s]
            self.rule_start[i] = len(data)
            self.rule_len[i] = len(rhs)
            data.extend(self.index[t] for t in rhs)
        self.rule_data = np.asarray(data if data else [0], dtype=DTYPE)
        self.off_ck = np.array([0 if (s.stage == checkpoint and s.base != HASH) else 1 for s in symbols], dtype=np.int64)
        self.max_rhs = int(max(self.rule_len.max(), 0))
        self._base = np.array([{"0": 0, "1": 1, A: 2, HASH: 3}[s.base] for s in symbols], dtype=np.int8)
        self._dot = np.array([s.dot for s in symbols], dtype=np.int8)
        self._bar = np.array([s.barred for s in symbols], dtype=np.bool_)
        self._mark = np.array([s.marked for s in symbols], dtype=np.bool_)
        self._stage = np.array([int(s.stage) for s in symbols], dtype=np.int64)
        self._k = np.array([s.k for s in symbols], dtype=np.int64)

    @classmethod
    def from_compiled(cls, compiled) -> "Machine":
        return cls(compiled.system.rules, compiled.system.alphabet, compiled.checkpoint)

    def encode(self, word: Sequence[DecoratedSymbol]) -> np.ndarray:
        return np.fromiter((self.index[s] for s in word), dtype=DTYPE, count=len(word))

    def decode(self, word: np.ndarray) -> Tuple[DecoratedSymbol, ...]:
        syms = self.symbols
        return tuple(syms[i] for i in word.tolist())

    def view(self, word: np.ndarray) -> Union[DecodedView, NotACheckpoint]:
        """Same result as ``codec.decode`` on the symbol word, computed on integer codes."""
        bits = np.empty(len(word) // 2 + 1, dtype=np.int8)
        ok, k, counter, cut, nbits, stage = _view_kernel(word, self._base, self._dot, self._bar, self._mark, self._stage, self._k, bits)
        if not ok:
            return decode(self.decode(word))
        dataword = (bits[:nbits] + ord("0")).tobytes().decode("ascii")
        return DecodedView(dataword, int(k), int(counter), int(cut), Stage(int(stage)))

    def advance(self, word: np.ndarray, budget: int, compiled_loop: bool = True) -> Segment:
        """Run from ``word`` until the next checkpoint or another stop."""
        fn = _kernel if compiled_loop else run_to_checkpoint_py
        size = len(word)
        cap = max(64, 4 * size + 4 * self.max_rhs)
        buf = np.empty(cap, dtype=DTYPE)
        buf[:size] = word
        head, tail, total = 0, size, 0
        while True:
            status, head, tail, steps, last = fn(
                buf, head, tail, self.rule_start, self.rule_len, self.rule_data, self.off_ck, budget - total
            )
            total += steps
            if status != NEED_SPACE:
                return Segment(int(status), buf[head:tail].copy(), total, int(last))
            live = tail - head
            grown = np.empty(max(2 * cap, 2 * live + 4 * self.max_rhs), dtype=DTYPE)
            grown[:live] = buf[head:tail]
            buf, cap, head, tail = grown, len(grown), 0, live


def symbol_name(machine: Machine, sid: int) -> Optional[str]:
    return None if sid < 0 else render_symbol(machine.symbols[sid])
