"""Marked graphs: places with one input and one output transition each."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterator, Sequence

import networkx as nx

Marking = tuple[int, ...]


class MarkedGraphError(ValueError):
    pass


class SafetyViolation(MarkedGraphError):
    def __init__(self, marking: Marking, place: "Place", trace: tuple):
        self.marking = marking
        self.place = place
        self.trace = trace
        super().__init__(f"place {place} holds {marking[place.id]} tokens (graph is not 1-safe)")


@dataclass(frozen=True)
class Place:
    id: int
    src: Hashable
    dst: Hashable
    kind: Hashable = None

    def __str__(self) -> str:
        return f"{self.src} -> {self.dst}"


@dataclass(frozen=True)
class Final:
    marking: Marking


@dataclass(frozen=True)
class RejectedAt:
    index: int
    event: Hashable


Admission = Final | RejectedAt


class MarkedGraph:
    def __init__(self, transitions: Sequence[Hashable], places: Sequence[tuple], init_marking: Sequence[int]):
        """``places`` holds ``(src, dst)`` or ``(src, dst, kind)`` tuples; ids follow list order."""
        self.transitions = tuple(transitions)
        self._tindex = {t: i for i, t in enumerate(self.transitions)}
        if len(self._tindex) != len(self.transitions):
            raise MarkedGraphError("duplicate transitions")
        built = []
        seen = set()
        for pid, spec in enumerate(places):
            src, dst, kind = (tuple(spec) + (None,))[:3]
            for t in (src, dst):
                if t not in self._tindex:
                    raise MarkedGraphError(f"place {src} -> {dst} uses unknown transition {t}")
            # parallel places are fine; a repeated tag would make place(kind) ambiguous
            if kind is not None:
                if kind in seen:
                    raise MarkedGraphError(f"duplicate place tag {kind}")
                seen.add(kind)
            built.append(Place(pid, src, dst, kind))
        self.places = tuple(built)
        init = tuple(int(x) for x in init_marking)
        if len(init) != len(self.places):
            raise MarkedGraphError("initial marking must give a token count for every place")
        if any(x < 0 for x in init):
            raise MarkedGraphError("negative token count")
        self.init_marking: Marking = init
        self._inputs = [[] for _ in self.transitions]
        self._outputs = [[] for _ in self.transitions]
        for p in self.places:
            self._inputs[self._tindex[p.dst]].append(p.id)
            self._outputs[self._tindex[p.src]].append(p.id)
        self._inputs = [tuple(x) for x in self._inputs]
        self._outputs = [tuple(x) for x in self._outputs]

    def __repr__(self) -> str:
        return f"MarkedGraph({len(self.transitions)} transitions, {len(self.places)} places)"

    def _t(self, e: Hashable) -> int:
        try:
            return self._tindex[e]
        except KeyError:
            raise MarkedGraphError(f"unknown transition {e}") from None

    def inputs(self, e: Hashable) -> tuple[Place, ...]:
        return tuple(self.places[i] for i in self._inputs[self._t(e)])

    def outputs(self, e: Hashable) -> tuple[Place, ...]:
        return tuple(self.places[i] for i in self._outputs[self._t(e)])

    def place_between(self, src: Hashable, dst: Hashable) -> Place | None:
        found = [p for p in self.places if p.src == src and p.dst == dst]
        if len(found) > 1:
            raise MarkedGraphError(f"more than one place {src} -> {dst}")
        return found[0] if found else None

    def place(self, kind: Hashable) -> Place:
        for p in self.places:
            if p.kind == kind:
                return p
        raise KeyError(kind)

    def is_enabled(self, m: Marking, e: Hashable) -> bool:
        return all(m[i] > 0 for i in self._inputs[self._t(e)])

    def enabled(self, m: Marking) -> list:
        return [t for i, t in enumerate(self.transitions) if all(m[p] > 0 for p in self._inputs[i])]

    def fire(self, m: Marking, e: Hashable) -> Marking:
        ti = self._t(e)
        if not all(m[i] > 0 for i in self._inputs[ti]):
            raise MarkedGraphError(f"transition {e} fired while disabled")
        out = list(m)
        for i in self._inputs[ti]:
            out[i] -= 1
        for i in self._outputs[ti]:
            out[i] += 1
        return tuple(out)

    def admits(self, t: Sequence[Hashable]) -> Admission:
        m = self.init_marking
        for k, e in enumerate(t):
            if not self.is_enabled(m, e):
                return RejectedAt(k, e)
            m = self.fire(m, e)
        return Final(m)

    def enumerate_traces(self, depth: int) -> Iterator[tuple[tuple, Marking]]:
        """Yield every admitted trace of length <= depth with its marking, depth-first."""
        trace: list = []

        def go(m: Marking, remaining: int):
            yield tuple(trace), m
            if remaining == 0:
                return
            for e in self.transitions:
                if self.is_enabled(m, e):
                    trace.append(e)
                    yield from go(self.fire(m, e), remaining - 1)
                    trace.pop()

        yield from go(self.init_marking, depth)

    def reachable_markings(self, bound: int = 1) -> dict[Marking, tuple]:
        """All reachable markings, each with a shortest trace reaching it.

        Raises :class:`SafetyViolation` as soon as a place exceeds ``bound``.
        """
        self._check_bound(self.init_marking, bound, ())
        seen = {self.init_marking: ()}
        queue = deque([self.init_marking])
        while queue:
            m = queue.popleft()
            for e in self.enabled(m):
                m2 = self.fire(m, e)
                if m2 not in seen:
                    seen[m2] = seen[m] + (e,)
                    self._check_bound(m2, bound, seen[m2])
                    queue.append(m2)
        return seen

    def _check_bound(self, m: Marking, bound: int, trace: tuple) -> None:
        for i, x in enumerate(m):
            if x > bound:
                raise SafetyViolation(m, self.places[i], trace)

    def digraph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.transitions)
        for p in self.places:
            g.add_edge(p.src, p.dst, key=p.id)
        return g

    def simple_cycles(self) -> list[list[int]]:
        """Every elementary directed cycle, as a list of place ids."""
        g = nx.DiGraph()
        g.add_nodes_from(self.transitions)
        by_edge: dict[tuple, list[int]] = {}
        for p in self.places:
            g.add_edge(p.src, p.dst)
            by_edge.setdefault((p.src, p.dst), []).append(p.id)
        cycles = []
        for nodes in nx.simple_cycles(g):
            hops = [(nodes[i], nodes[(i + 1) % len(nodes)]) for i in range(len(nodes))]
            # parallel places between the same transitions give distinct cycles
            combos = [[]]
            for h in hops:
                combos = [c + [pid] for c in combos for pid in by_edge[h]]
            cycles.extend(combos)
        return cycles

    def simple_paths(self, max_len: int) -> list[list[int]]:
        """Every well-chained path of 1..max_len places that never repeats a place."""
        out = []

        def extend(path: list[int]):
            out.append(list(path))
            if len(path) == max_len:
                return
            last = self.places[path[-1]]
            for pid in self._outputs[self._tindex[last.dst]]:
                if pid not in path:
                    path.append(pid)
                    extend(path)
                    path.pop()

        for p in self.places:
            extend([p.id])
        return out

    def check_path(self, path: Sequence[int]) -> None:
        if not path:
            raise MarkedGraphError("empty path")
        for a, b in zip(path, path[1:]):
            if self.places[a].dst != self.places[b].src:
                raise MarkedGraphError(f"ill-chained path: {self.places[a]} then {self.places[b]}")

    def is_cycle(self, path: Sequence[int]) -> bool:
        self.check_path(path)
        return self.places[path[-1]].dst == self.places[path[0]].src

    def path_sum(self, m: Marking, path: Sequence[int]) -> int:
        self.check_path(path)
        return sum(m[i] for i in path)

    def path_ends(self, path: Sequence[int]) -> tuple:
        return self.places[path[0]].src, self.places[path[-1]].dst

    def with_marking(self, changes: dict[int, int]) -> "MarkedGraph":
        m = list(self.init_marking)
        for pid, tokens in changes.items():
            m[pid] = tokens
        return MarkedGraph(self.transitions, [(p.src, p.dst, p.kind) for p in self.places], m)

    def with_place_reversed(self, pid: int) -> "MarkedGraph":
        places = [(p.src, p.dst, p.kind) if p.id != pid else (p.dst, p.src, p.kind) for p in self.places]
        return MarkedGraph(self.transitions, places, self.init_marking)

    def to_dot(self, name: str = "marked_graph") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=box];"]
        for t in self.transitions:
            lines.append(f'  "{t}";')
        for p in self.places:
            tokens = self.init_marking[p.id]
            attrs = f'label="{"●" * tokens}"' if tokens else 'label=""'
            if p.kind is not None:
                attrs += f', tooltip="{p.kind}"'
            lines.append(f'  "{p.src}" -> "{p.dst}" [{attrs}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def helper_lemma_delta(graph: MarkedGraph, path: Sequence[int], e: Hashable) -> int:
    """Change in a path's token sum when ``e`` fires, by the four-case table.

    Firing ``e`` adds a token to the path iff the path starts at ``e``,
    removes one iff it ends at ``e``; both or neither leaves the sum alone.
    """
    start, end = graph.path_ends(path)
    if e == start and e == end:
        return 0
    if e == start:
        return 1
    if e == end:
        return -1
    return 0


def cycle_check(graph: MarkedGraph, cycle: Sequence[int], depth: int) -> bool:
    """True iff the cycle's token sum is the same at every marking reachable within ``depth`` firings."""
    if not graph.is_cycle(cycle):
        raise MarkedGraphError("path is not a cycle")
    target = graph.path_sum(graph.init_marking, cycle)
    frontier = {graph.init_marking}
    seen = set(frontier)
    for _ in range(depth):
        nxt = set()
        for m in frontier:
            for e in graph.enabled(m):
                m2 = graph.fire(m, e)
                if graph.path_sum(m2, cycle) != target:
                    return False
                if m2 not in seen:
                    seen.add(m2)
                    nxt.add(m2)
        frontier = nxt
    return True
