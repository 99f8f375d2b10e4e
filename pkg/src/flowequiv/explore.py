"""Depth-bounded exploration of a marked graph's admitted traces."""

from __future__ import annotations

from typing import Callable, Hashable, Iterator, TypeVar

from .markedgraph import MarkedGraph, Marking

S = TypeVar("S")


def explore(
    graph: MarkedGraph,
    root: S,
    advance: Callable[[S, Hashable], S],
    depth: int,
    key: Callable[[Marking, S], Hashable] | None = None,
    prefix: tuple = (),
) -> Iterator[tuple[tuple, Marking, S]]:
    """Depth-first walk yielding ``(trace, marking, state)`` for each admitted trace.

    ``advance`` threads a caller state along each trace. With ``key`` set, a
    node whose key was already expanded with at least as much remaining depth
    is skipped: its subtree cannot reveal anything new. Transitions are tried
    in ``graph.transitions`` order, so the walk is deterministic.
    """
    seen: dict[Hashable, int] = {}
    trace = list(prefix)
    marking = graph.init_marking
    for e in prefix:
        marking = graph.fire(marking, e)
        root = advance(root, e)

    def go(m: Marking, s: S, remaining: int):
        if key is not None:
            k = key(m, s)
            if seen.get(k, -1) >= remaining:
                return
            seen[k] = remaining
        yield tuple(trace), m, s
        if remaining == 0:
            return
        for e in graph.enabled(m):
            trace.append(e)
            yield from go(graph.fire(m, e), advance(s, e), remaining - 1)
            trace.pop()

    yield from go(marking, root, depth - len(prefix))


def no_state(s: None, e: Hashable) -> None:
    return None
