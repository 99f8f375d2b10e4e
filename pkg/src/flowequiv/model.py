"""Shared vocabulary: values, latches, circuits, events, traces, transparency."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union


class Undefined(Enum):
    X = "X"

    def __repr__(self) -> str:
        return "X"

    __str__ = __repr__


X = Undefined.X

# A latch datum: a natural number or the undefined value X.
Value = Union[int, Undefined]


def format_value(v: Value) -> str:
    return "X" if v is X else str(v)


def value_to_json(v: Value) -> Union[int, str]:
    return "X" if v is X else v


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class Latch:
    parity: Parity
    name: str

    @property
    def is_even(self) -> bool:
        return self.parity is Parity.EVEN

    @property
    def is_odd(self) -> bool:
        return self.parity is Parity.ODD

    def __str__(self) -> str:
        return self.name


def Even(name: str) -> Latch:
    return Latch(Parity.EVEN, name)


def Odd(name: str) -> Latch:
    return Latch(Parity.ODD, name)


class Edge(Enum):
    RISE = "+"
    FALL = "-"


@dataclass(frozen=True)
class Event:
    edge: Edge
    latch: Latch

    @property
    def is_rise(self) -> bool:
        return self.edge is Edge.RISE

    @property
    def is_fall(self) -> bool:
        return self.edge is Edge.FALL

    def __str__(self) -> str:
        return f"{self.latch.name}{self.edge.value}"


def Rise(latch: Latch) -> Event:
    return Event(Edge.RISE, latch)


def Fall(latch: Latch) -> Event:
    return Event(Edge.FALL, latch)


# Oldest event first; appending at the end extends the trace.
Trace = tuple[Event, ...]


class Transparency(Enum):
    TRANSPARENT = "transparent"
    OPAQUE = "opaque"


TRANSPARENT = Transparency.TRANSPARENT
OPAQUE = Transparency.OPAQUE


def format_trace(t: Sequence[Event]) -> str:
    return " ".join(str(e) for e in t)


@dataclass(frozen=True, eq=False)
class Circuit:
    """A closed latch-based circuit.

    Pairs in ``even_odd_neighbors`` / ``odd_even_neighbors`` are
    ``(left, right)``: data flows from the left latch into the right one.
    ``next_state`` maps each latch to an expression over its left neighbors
    (see :mod:`flowequiv.netlist`).
    """

    evens: tuple[Latch, ...]
    odds: tuple[Latch, ...]
    even_odd_neighbors: tuple[tuple[Latch, Latch], ...]
    odd_even_neighbors: tuple[tuple[Latch, Latch], ...]
    next_state: Mapping[Latch, object]
    _left: dict = field(init=False, repr=False)
    _right: dict = field(init=False, repr=False)
    _by_name: dict = field(init=False, repr=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        latches = self.evens + self.odds
        by_name = {l.name: l for l in latches}
        left: dict[Latch, list[Latch]] = {l: [] for l in latches}
        right: dict[Latch, list[Latch]] = {l: [] for l in latches}
        for a, b in self.pairs:
            left[b].append(a)
            right[a].append(b)
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "_index", {l: i for i, l in enumerate(latches)})
        object.__setattr__(self, "_left", {l: tuple(v) for l, v in left.items()})
        object.__setattr__(self, "_right", {l: tuple(v) for l, v in right.items()})

    @property
    def latches(self) -> tuple[Latch, ...]:
        return self.evens + self.odds

    @property
    def pairs(self) -> tuple[tuple[Latch, Latch], ...]:
        """All neighbor pairs, even-odd first, in file order."""
        return self.even_odd_neighbors + self.odd_even_neighbors

    @property
    def events(self) -> tuple[Event, ...]:
        """Every clock event, in declaration order (rise before fall per latch)."""
        return tuple(e for l in self.latches for e in (Rise(l), Fall(l)))

    def latch(self, name: str) -> Latch:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown latch {name!r}") from None

    def index(self, l: Latch) -> int:
        """Position of ``l`` in :attr:`latches`."""
        return self._index[l]

    def __contains__(self, l: object) -> bool:
        return l in self._left


def left_neighbors(c: Circuit, l: Latch) -> tuple[Latch, ...]:
    try:
        return c._left[l]
    except KeyError:
        raise KeyError(f"unknown latch {l}") from None


def right_neighbors(c: Circuit, l: Latch) -> tuple[Latch, ...]:
    try:
        return c._right[l]
    except KeyError:
        raise KeyError(f"unknown latch {l}") from None


def transparency(t: Sequence[Event], l: Latch) -> Transparency:
    for e in reversed(t):
        if e.latch == l:
            return TRANSPARENT if e.is_rise else OPAQUE
    return TRANSPARENT if l.is_odd else OPAQUE


def num_events(e: Event, t: Sequence[Event]) -> int:
    return sum(1 for x in t if x == e)
