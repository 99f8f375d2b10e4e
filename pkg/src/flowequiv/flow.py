"""Flow-equivalence verdicts and protocol refinement."""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Mapping, Union

from .asyncexec import AsyncState, CyclicTransparency, EvalError, TraceOracle, step
from .explore import explore
from .markedgraph import Final, MarkedGraph, MarkedGraphError, SafetyViolation
from .model import Circuit, Event, Fall, Latch, Trace, Value, transparency, OPAQUE, value_to_json
from .protocols import ProtocolKind, build_protocol
from .sync import SyncRun

DEFAULT_DEPTH = 12


@dataclass(frozen=True)
class Pass:
    protocol: str
    depth: int
    states: int = 0

    def to_json(self) -> dict:
        return {"verdict": "pass", "protocol": self.protocol, "depth": self.depth, "states": self.states}


@dataclass(frozen=True)
class ViolationReport:
    trace: Trace
    latch: Latch
    got: Value
    expected: Value
    fall_count: int
    protocol: str = ""

    def to_json(self) -> dict:
        return {
            "verdict": "violation",
            "protocol": self.protocol,
            "trace": [str(e) for e in self.trace],
            "latch": self.latch.name,
            "got": value_to_json(self.got),
            "expected": value_to_json(self.expected),
            "fall_count": self.fall_count,
        }


@dataclass(frozen=True)
class CyclicTransparencyFinding:
    trace: Trace
    cycle: tuple[Latch, ...]
    protocol: str = ""

    def to_json(self) -> dict:
        return {
            "verdict": "cyclic-transparency",
            "protocol": self.protocol,
            "trace": [str(e) for e in self.trace],
            "cycle": [l.name for l in self.cycle],
        }


Verdict = Union[Pass, ViolationReport, CyclicTransparencyFinding]


@dataclass(frozen=True)
class _Broken:
    error: EvalError


def _advance(s, e: Event):
    if isinstance(s, _Broken):
        return s
    try:
        return step(s, e)
    except EvalError as err:
        return _Broken(err)


def _flow_key(m, s) -> Hashable:
    if isinstance(s, _Broken):
        return ("broken", id(s))
    falls = s.counts[1::2]
    return (m, s.stored, s.transparent, falls)


def _judge(c: Circuit, sync: SyncRun, trace: Trace, s, name: str) -> Verdict | None:
    if isinstance(s, _Broken):
        err = s.error
        cycle = err.cycle if isinstance(err, CyclicTransparency) else ()
        return CyclicTransparencyFinding(trace, cycle, name)
    for i, l in enumerate(c.latches):
        if s.transparent[i]:
            continue
        falls = s.counts[2 * i + 1]
        expected = sync.value(falls, l)
        if s.stored[i] != expected:
            return ViolationReport(trace, l, s.stored[i], expected, falls, name)
    return None


def _graph_and_name(c: Circuit, protocol) -> tuple[MarkedGraph, str]:
    if isinstance(protocol, MarkedGraph):
        return protocol, "custom"
    kind = ProtocolKind(protocol)
    return build_protocol(kind, c), kind.value


def _dfs_subtree(c, st0, graph, name, depth, prefix, reduce) -> tuple[Verdict | None, int]:
    sync = SyncRun(c, st0)
    states = 0
    root = AsyncState.initial(c, st0)
    for trace, _m, s in explore(graph, root, _advance, depth, key=_flow_key if reduce else None, prefix=prefix):
        states += 1
        found = _judge(c, sync, trace, s, name)
        if found is not None:
            return found, states
    return None, states


def check_flow_equivalence(
    c: Circuit,
    st0: Mapping[Latch, Value],
    protocol: ProtocolKind | str | MarkedGraph,
    depth: int = DEFAULT_DEPTH,
    *,
    shortest: bool = False,
    reduce: bool = True,
    workers: int | None = None,
) -> Verdict:
    """Bounded check that every opaque latch holds its synchronous value.

    Explores every admitted trace of length <= ``depth``. At each prefix and
    for each opaque latch ``l``, the held value must equal the synchronous
    value at cycle ``num_events(l-, prefix)``. Returns the first violation in
    depth-first order (breadth-first with ``shortest``), else :class:`Pass`.

    ``reduce`` merges prefixes that reach the same marking, held values,
    phases and fall counts; verdicts are unchanged. ``workers`` > 0 splits
    the first level of the search across processes (default: ``FE_THREADS``).
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    graph, name = _graph_and_name(c, protocol)
    if shortest:
        return _bfs_check(c, st0, graph, name, depth)
    if workers is None:
        workers = int(os.environ.get("FE_THREADS", "0") or 0)
    if workers > 0:
        return _parallel_check(c, st0, graph, name, depth, reduce, workers)
    found, states = _dfs_subtree(c, st0, graph, name, depth, (), reduce)
    return found if found is not None else Pass(name, depth, states)


def _parallel_check(c, st0, graph, name, depth, reduce, workers) -> Verdict:
    sync = SyncRun(c, st0)
    root = AsyncState.initial(c, st0)
    found = _judge(c, sync, (), root, name)
    if found is not None:
        return found
    firsts = graph.enabled(graph.init_marking)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_dfs_subtree, c, st0, graph, name, depth, (e,), reduce) for e in firsts]
        results = [f.result() for f in futures]
    states = 1
    for e, (res, n) in zip(firsts, results):
        states += n
        if res is not None:
            return res
    return Pass(name, depth, states)


def _bfs_check(c, st0, graph, name, depth) -> Verdict:
    sync = SyncRun(c, st0)
    root = AsyncState.initial(c, st0)
    queue = deque([((), graph.init_marking, root)])
    seen = {_flow_key(graph.init_marking, root)}
    while queue:
        trace, m, s = queue.popleft()
        found = _judge(c, sync, trace, s, name)
        if found is not None:
            return found
        if len(trace) == depth:
            continue
        for e in graph.enabled(m):
            m2 = graph.fire(m, e)
            s2 = _advance(s, e)
            k = _flow_key(m2, s2)
            if k in seen:
                continue
            seen.add(k)
            queue.append((trace + (e,), m2, s2))
    return Pass(name, depth, len(seen))


def replay_violation(c: Circuit, st0: Mapping[Latch, Value], graph: MarkedGraph, v: ViolationReport) -> bool:
    """Re-derive a violation from scratch with the direct evaluator."""
    if not isinstance(graph.admits(v.trace), Final):
        return False
    if transparency(v.trace, v.latch) is not OPAQUE:
        return False
    got = TraceOracle(c, st0, v.trace).value(v.latch)
    falls = sum(1 for e in v.trace if e == Fall(v.latch))
    expected = SyncRun(c, st0).value(falls, v.latch)
    return got == v.got and expected == v.expected and falls == v.fall_count and got != expected


@dataclass(frozen=True)
class Included:
    pairs: int = 0

    def to_json(self) -> dict:
        return {"refinement": "included", "joint_markings": self.pairs}


@dataclass(frozen=True)
class Witness:
    trace: tuple
    event: Hashable

    def to_json(self) -> dict:
        return {"refinement": "witness", "trace": [str(e) for e in self.trace], "event": str(self.event)}


RefinementResult = Union[Included, Witness]


def check_refinement(left: MarkedGraph, right: MarkedGraph) -> RefinementResult:
    """Decide whether every trace ``left`` admits is admitted by ``right``.

    Breadth-first search over jointly reachable marking pairs; the first pair
    where ``left`` enables an event that ``right`` does not yields the
    shortest :class:`Witness`. Both graphs must be 1-safe, which bounds the
    search.
    """
    if set(left.transitions) != set(right.transitions):
        raise MarkedGraphError("graphs have different transition sets")
    start = (left.init_marking, right.init_marking)
    parent: dict[tuple, tuple | None] = {start: None}
    queue = deque([start])

    def path_to(node) -> tuple:
        out = []
        while parent[node] is not None:
            node, e = parent[node]
            out.append(e)
        return tuple(reversed(out))

    while queue:
        node = queue.popleft()
        a, b = node
        for e in left.enabled(a):
            if not right.is_enabled(b, e):
                return Witness(path_to(node), e)
            nxt = (left.fire(a, e), right.fire(b, e))
            for g, m in zip((left, right), nxt):
                for i, x in enumerate(m):
                    if x > 1:
                        raise SafetyViolation(m, g.places[i], path_to(node) + (e,))
            if nxt not in parent:
                parent[nxt] = (node, e)
                queue.append(nxt)
    return Included(len(parent))


def witness_replays(left: MarkedGraph, right: MarkedGraph, w: Witness) -> bool:
    t = w.trace + (w.event,)
    if not isinstance(left.admits(t), Final):
        return False
    before = right.admits(w.trace)
    return isinstance(before, Final) and not right.is_enabled(before.marking, w.event)


class TransferRefused(ValueError):
    pass


@dataclass(frozen=True)
class TransferNote:
    protocol: str
    inherited_from: str
    depth: int

    def __str__(self) -> str:
        return (
            f"{self.protocol}: flow equivalence inherited from {self.inherited_from} "
            f"(bounded, depth {self.depth}); every {self.protocol}-admitted trace is "
            f"{self.inherited_from}-admitted and was covered by that check"
        )


def transfer_flow_equivalence(r: RefinementResult, base: Verdict, protocol: str = "left") -> TransferNote:
    if isinstance(r, Witness):
        raise TransferRefused(f"no refinement: {protocol} admits a trace the base protocol rejects")
    if not isinstance(base, Pass):
        raise TransferRefused("base protocol did not pass its flow-equivalence check")
    return TransferNote(protocol, base.protocol, base.depth)
