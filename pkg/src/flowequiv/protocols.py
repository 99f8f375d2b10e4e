"""Handshake protocols as marked graphs over a circuit's clock events.

Every protocol has, for each latch ``l``, the self places ``l+ -> l-`` and
``l- -> l+``, and for each neighbor pair ``(l, l')`` (``l`` feeding ``l'``)
a backward place ``l'- -> l+``. They differ only in the forward place:

=================  ===============
desynchronization  ``l+ -> l'-``
rise-decoupled     ``l- -> l'-``
fall-decoupled     ``l+ -> l'+``
=================  ===============
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .model import Circuit, Fall, Latch, Rise
from .markedgraph import MarkedGraph


class ProtocolKind(Enum):
    DESYNC = "desync"
    RISE = "rise"
    FALL = "fall"

    @property
    def title(self) -> str:
        return {
            ProtocolKind.DESYNC: "desynchronization",
            ProtocolKind.RISE: "rise-decoupled",
            ProtocolKind.FALL: "fall-decoupled",
        }[self]


class PlaceKind(Enum):
    SELF_FALL = "self_fall"  # l+ -> l-
    SELF_RISE = "self_rise"  # l- -> l+
    FORWARD = "forward"
    BACKWARD = "backward"  # l'- -> l+


@dataclass(frozen=True)
class PlaceTag:
    kind: PlaceKind
    left: Latch
    right: Latch | None = None

    def __str__(self) -> str:
        if self.right is None:
            return f"{self.kind.value}({self.left.name})"
        return f"{self.kind.value}({self.left.name},{self.right.name})"


def self_fall(l: Latch) -> PlaceTag:
    return PlaceTag(PlaceKind.SELF_FALL, l)


def self_rise(l: Latch) -> PlaceTag:
    return PlaceTag(PlaceKind.SELF_RISE, l)


def forward(l: Latch, r: Latch) -> PlaceTag:
    return PlaceTag(PlaceKind.FORWARD, l, r)


def backward(l: Latch, r: Latch) -> PlaceTag:
    return PlaceTag(PlaceKind.BACKWARD, l, r)


def forward_endpoints(kind: ProtocolKind, l: Latch, r: Latch) -> tuple:
    if kind is ProtocolKind.DESYNC:
        return Rise(l), Fall(r)
    if kind is ProtocolKind.RISE:
        return Fall(l), Fall(r)
    return Rise(l), Rise(r)


def place_structure(kind: ProtocolKind, c: Circuit) -> list[tuple]:
    """``(src, dst, tag)`` for every place, self places first."""
    places = []
    for l in c.latches:
        places.append((Rise(l), Fall(l), self_fall(l)))
        places.append((Fall(l), Rise(l), self_rise(l)))
    for l, r in c.pairs:
        src, dst = forward_endpoints(kind, l, r)
        places.append((src, dst, forward(l, r)))
        places.append((Fall(r), Rise(l), backward(l, r)))
    return places


def initial_tokens(kind: ProtocolKind, tag: PlaceTag) -> int:
    if tag.kind is PlaceKind.SELF_FALL:
        return 1 if tag.left.is_odd else 0
    if tag.kind is PlaceKind.SELF_RISE:
        return 1 if tag.left.is_even else 0
    if tag.kind is PlaceKind.BACKWARD:
        return 0
    if kind is ProtocolKind.DESYNC:
        return 1
    if kind is ProtocolKind.RISE:
        return 1 if tag.left.is_even else 0
    return 1 if tag.left.is_odd else 0


def build_protocol(kind: ProtocolKind, c: Circuit) -> MarkedGraph:
    places = place_structure(kind, c)
    graph = MarkedGraph(c.events, places, [initial_tokens(kind, tag) for _, _, tag in places])
    # at most one place between two events
    endpoints = [(p.src, p.dst) for p in graph.places]
    assert len(set(endpoints)) == len(endpoints), "parallel places in protocol graph"
    return graph


def pair_cycle(kind: ProtocolKind, l: Latch, r: Latch) -> list[PlaceTag]:
    """The cycle through pair ``(l, r)``'s forward and backward places."""
    if kind is ProtocolKind.DESYNC:
        return [forward(l, r), backward(l, r)]
    if kind is ProtocolKind.RISE:
        return [self_fall(l), forward(l, r), backward(l, r)]
    return [forward(l, r), self_fall(r), backward(l, r)]


def self_cycle(l: Latch) -> list[PlaceTag]:
    return [self_fall(l), self_rise(l)]


def tag_ids(graph: MarkedGraph, tags: list[PlaceTag]) -> list[int]:
    return [graph.place(t).id for t in tags]


def local_cycles(kind: ProtocolKind, c: Circuit, graph: MarkedGraph) -> list[list[int]]:
    """Place-id lists of every self cycle and pair cycle, in the graph's chaining order."""
    out = [tag_ids(graph, self_cycle(l)) for l in c.latches]
    out += [tag_ids(graph, pair_cycle(kind, l, r)) for l, r in c.pairs]
    return out


def odd_falls(c: Circuit) -> set:
    return {Fall(o) for o in c.odds}


def derive_markings(kind: ProtocolKind, c: Circuit) -> list[tuple[int, ...]]:
    """Every 0/1 initial marking meeting the protocol's shape constraints.

    (i) each self cycle and pair cycle holds exactly one token;
    (ii) odd latches start transparent: ``self_fall(O) = 1``, ``self_rise(E) = 1``;
    (iii) the initially enabled transitions are exactly the odd falls.

    The search assigns places one at a time and abandons a branch only once a
    constraint is already violated, so it is exhaustive over ``2**#places``.
    """
    graph = build_protocol(kind, c)
    n = len(graph.places)
    cycles = local_cycles(kind, c, graph)
    pinned = {graph.place(self_fall(o)).id: 1 for o in c.odds}
    pinned.update({graph.place(self_rise(e)).id: 1 for e in c.evens})
    # cycles become checkable once their highest place id is assigned
    due: dict[int, list[list[int]]] = {}
    for cyc in cycles:
        due.setdefault(max(cyc), []).append(cyc)
    want_enabled = odd_falls(c)

    found = []
    m = [0] * n

    def search(i: int) -> None:
        if i == n:
            if set(graph.enabled(tuple(m))) == want_enabled:
                found.append(tuple(m))
            return
        for bit in (0, 1):
            if pinned.get(i, bit) != bit:
                continue
            m[i] = bit
            if all(sum(m[p] for p in cyc) == 1 for cyc in due.get(i, ())):
                search(i + 1)
        m[i] = 0

    search(0)
    return found


def derive_markings_bruteforce(kind: ProtocolKind, c: Circuit) -> list[tuple[int, ...]]:
    """Same constraints as :func:`derive_markings`, by plain enumeration (small graphs only)."""
    graph = build_protocol(kind, c)
    cycles = local_cycles(kind, c, graph)
    pinned = {graph.place(self_fall(o)).id for o in c.odds} | {graph.place(self_rise(e)).id for e in c.evens}
    want_enabled = odd_falls(c)
    out = []
    for bits in itertools.product((0, 1), repeat=len(graph.places)):
        if any(bits[p] != 1 for p in pinned):
            continue
        if any(sum(bits[p] for p in cyc) != 1 for cyc in cycles):
            continue
        if set(graph.enabled(bits)) != want_enabled:
            continue
        out.append(bits)
    return out
