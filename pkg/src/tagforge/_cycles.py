"""Configuration-recurrence monitor shared by the tag and cyclic interpreters.

Configurations are remembered in a bounded dict. Once the cap is reached the
dict is frozen (still consulted, never grown) and Brent's power-of-two
tortoise/hare takes over for configurations first seen after the freeze.
Either way the reported recurrence is the first one: Brent's period is
followed by a replay from the freeze point to locate the cycle entry.
"""
from __future__ import annotations

from typing import Callable, Hashable, NamedTuple, Optional, Tuple

DEFAULT_MEMORY_CAP = 1 << 20


class Recurrence(NamedTuple):
    entry: int  # step index of the first occurrence of the repeated configuration
    period: int
    state: Hashable


class CycleMonitor:
    def __init__(self, advance: Callable[[Hashable], Hashable], cap: int = DEFAULT_MEMORY_CAP):
        if cap < 1:
            raise ValueError("cycle memory cap must be positive")
        self._advance = advance
        self._cap = cap
        self._seen: dict = {}
        self._origin: Optional[Tuple[Hashable, int]] = None
        self._tortoise = None
        self._power = 1
        self._lam = 0

    @property
    def degraded(self) -> bool:
        return self._origin is not None

    def observe(self, state: Hashable, index: int) -> Optional[Recurrence]:
        """Record ``state`` reached after ``index`` steps; report the first recurrence."""
        prev = self._seen.get(state)
        if prev is not None:
            return Recurrence(prev, index - prev, state)
        if self._origin is None:
            if len(self._seen) < self._cap:
                self._seen[state] = index
                return None
            self._origin = (state, index)
            self._tortoise = state
            return None
        self._lam += 1
        if state == self._tortoise:
            return self._locate(self._lam)
        if self._power == self._lam:
            self._tortoise = state
            self._power *= 2
            self._lam = 0
        return None

    def _locate(self, period: int) -> Recurrence:
        start, start_index = self._origin
        hare = start
        for _ in range(period):
            hare = self._advance(hare)
        tortoise = start
        mu = 0
        while tortoise != hare:
            tortoise = self._advance(tortoise)
            hare = self._advance(hare)
            mu += 1
        return Recurrence(start_index + mu, period, tortoise)
