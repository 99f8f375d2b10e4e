"""Asynchronous execution of clock traces.

Two evaluators live here and are checked against each other:

* :func:`async_eval` / :class:`TraceOracle` follow the four-case recursion
  over trace prefixes directly (transparent latch, empty trace, opaque frame,
  latching fall).
* :class:`AsyncState` / :func:`step` carry the circuit forward one event at a
  time, remembering only each opaque latch's held value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import (
    OPAQUE,
    TRANSPARENT,
    Circuit,
    Event,
    Latch,
    Transparency,
    Value,
    X,
    left_neighbors,
    transparency,
)
from .netlist import next_state


class EvalError(Exception):
    pass


class CyclicTransparency(EvalError):
    def __init__(self, cycle: Sequence[Latch]):
        self.cycle = tuple(cycle)
        names = " -> ".join(l.name for l in self.cycle + self.cycle[:1])
        super().__init__(f"combinational cycle through transparent latches: {names}")


class UndefinedBase(EvalError):
    def __init__(self, latch: Latch):
        self.latch = latch
        super().__init__(f"no base value for latch {latch.name} opaque at the empty trace")


class TraceOracle:
    """Direct evaluator over a growable trace.

    Memo entries are keyed by (prefix length, latch); ``push``/``pop`` keep
    them valid while a depth-first search extends and retracts the trace.
    """

    def __init__(self, c: Circuit, st0: Mapping[Latch, Value], t: Iterable[Event] = ()):
        self.circuit = c
        self.st0 = st0
        self.trace: list[Event] = []
        self._memo: list[dict[Latch, Value]] = [{}]
        self._phase: list[dict[Latch, Transparency]] = [{}]
        for e in t:
            self.push(e)

    def push(self, e: Event) -> None:
        self.trace.append(e)
        self._memo.append({})
        self._phase.append({})

    def pop(self) -> Event:
        self._memo.pop()
        self._phase.pop()
        return self.trace.pop()

    def transparency(self, k: int, l: Latch) -> Transparency:
        cache = self._phase[k]
        if l not in cache:
            cache[l] = transparency(self.trace[:k], l)
        return cache[l]

    def value(self, l: Latch, k: int | None = None) -> Value:
        """Value of ``l`` after the first ``k`` events (default: whole trace)."""
        if k is None:
            k = len(self.trace)
        return self._value(k, l, ())

    def _value(self, k: int, l: Latch, path: tuple[Latch, ...]) -> Value:
        while True:
            memo = self._memo[k]
            if l in memo:
                return memo[l]
            if self.transparency(k, l) is TRANSPARENT:
                if l in path:
                    raise CyclicTransparency(path[path.index(l):])
                inner = path + (l,)
                env = {x.name: self._value(k, x, inner) for x in left_neighbors(self.circuit, l)}
                v = next_state(self.circuit, l, env)
            elif k == 0:
                if not l.is_even:
                    raise UndefinedBase(l)
                v = self.st0[l]
            elif self.trace[k - 1].is_fall and self.trace[k - 1].latch == l:
                env = {x.name: self._value(k - 1, x, ()) for x in left_neighbors(self.circuit, l)}
                v = next_state(self.circuit, l, env)
            else:
                # opaque and the last event is not l's fall: same value as one event earlier
                k -= 1
                path = ()
                continue
            memo[l] = v
            return v


def async_eval(c: Circuit, st0: Mapping[Latch, Value], t: Sequence[Event], l: Latch) -> Value:
    """Value of latch ``l`` after trace ``t``; raises :class:`EvalError` if none exists."""
    return TraceOracle(c, st0, t).value(l)


@dataclass(frozen=True)
class AsyncState:
    """Incremental execution state.

    ``stored[i]`` is the value held by latch ``c.latches[i]`` while it is
    opaque; ``transparent[i]`` its current phase; ``counts[j]`` the number of
    occurrences of ``c.events[j]`` consumed so far.
    """

    circuit: Circuit
    stored: tuple[Value, ...]
    transparent: tuple[bool, ...]
    counts: tuple[int, ...]

    @classmethod
    def initial(cls, c: Circuit, st0: Mapping[Latch, Value]) -> "AsyncState":
        return cls(
            circuit=c,
            stored=tuple(st0.get(l, X) if l.is_even else X for l in c.latches),
            transparent=tuple(l.is_odd for l in c.latches),
            counts=(0,) * (2 * len(c.latches)),
        )

    def phase(self, l: Latch) -> Transparency:
        return TRANSPARENT if self.transparent[self.circuit.index(l)] else OPAQUE

    def num_events(self, e: Event) -> int:
        return self.counts[2 * self.circuit.index(e.latch) + (1 if e.is_fall else 0)]

    def key(self) -> tuple:
        return (self.stored, self.transparent, self.counts)


def current_value(s: AsyncState, l: Latch) -> Value:
    return _current(s, l, ())


def _current(s: AsyncState, l: Latch, path: tuple[Latch, ...]) -> Value:
    c = s.circuit
    i = c.index(l)
    if not s.transparent[i]:
        return s.stored[i]
    if l in path:
        raise CyclicTransparency(path[path.index(l):])
    inner = path + (l,)
    env = {x.name: _current(s, x, inner) for x in left_neighbors(c, l)}
    return next_state(c, l, env)


def step(s: AsyncState, e: Event) -> AsyncState:
    c = s.circuit
    i = c.index(e.latch)
    counts = list(s.counts)
    counts[2 * i + (1 if e.is_fall else 0)] += 1
    transparent = list(s.transparent)
    stored = s.stored
    if e.is_rise:
        transparent[i] = True
    else:
        env = {x.name: current_value(s, x) for x in left_neighbors(c, e.latch)}
        v = next_state(c, e.latch, env)
        stored = stored[:i] + (v,) + stored[i + 1:]
        transparent[i] = False
    return AsyncState(c, stored, tuple(transparent), tuple(counts))


def run_trace(c: Circuit, st0: Mapping[Latch, Value], t: Iterable[Event]) -> AsyncState:
    s = AsyncState.initial(c, st0)
    for e in t:
        s = step(s, e)
    return s
