"""Synchronous execution: odd latches update first each cycle, then evens."""

from __future__ import annotations

from typing import Mapping

from .model import Circuit, Latch, Value, X, left_neighbors
from .netlist import next_state


class SyncRun:
    """Memoized synchronous execution of one circuit from one initial state.

    ``value(n, l)`` is the value latch ``l`` holds at clock cycle ``n``.
    Evens at ``n`` read odds at ``n``; odds at ``n`` read evens at ``n - 1``.
    """

    def __init__(self, c: Circuit, st0: Mapping[Latch, Value]):
        self.circuit = c
        self.st0 = dict(st0)
        self._memo: dict[tuple[Latch, int], Value] = {}
        self._filled = -1

    def value(self, n: int, l: Latch) -> Value:
        if n < 0:
            raise ValueError("cycle index must be non-negative")
        if l not in self.circuit:
            raise KeyError(f"unknown latch {l}")
        # fill lower cycles first so recursion depth stays bounded
        while self._filled < n - 1:
            self._filled += 1
            for x in self.circuit.latches:
                self._eval(self._filled, x)
        return self._eval(n, l)

    def _eval(self, n: int, l: Latch) -> Value:
        key = (l, n)
        if key in self._memo:
            return self._memo[key]
        if n == 0:
            v = self.st0.get(l, X) if l.is_even else X
        else:
            at = n if l.is_even else n - 1
            env = {x.name: self._eval(at, x) for x in left_neighbors(self.circuit, l)}
            v = next_state(self.circuit, l, env)
        self._memo[key] = v
        return v

    def row(self, n: int) -> list[Value]:
        return [self.value(n, l) for l in self.circuit.latches]


def sync_eval(c: Circuit, st0: Mapping[Latch, Value], n: int, l: Latch) -> Value:
    return SyncRun(c, st0).value(n, l)


def sync_table(c: Circuit, st0: Mapping[Latch, Value], up_to: int) -> list[list[Value]]:
    """Rows are cycles ``0..up_to``; columns follow ``c.latches``."""
    run = SyncRun(c, st0)
    return [run.row(n) for n in range(up_to + 1)]
