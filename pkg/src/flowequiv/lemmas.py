"""Executable checks of the protocol lemmas over bounded exploration.

Each check walks every admitted trace up to a depth and evaluates a
predicate on ``(trace, marking)``; the first counterexample per clause is
kept. Prefixes reaching the same marking and event counts are merged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .asyncexec import AsyncState, EvalError, current_value
from .explore import explore
from .flow import _advance, _Broken
from .markedgraph import MarkedGraph, helper_lemma_delta
from .model import Circuit, Fall, Latch, Rise, Value, left_neighbors
from .protocols import ProtocolKind, build_protocol, forward, pair_cycle, self_cycle, tag_ids
from .sync import SyncRun


@dataclass(frozen=True)
class LemmaViolation:
    lemma: str
    trace: tuple
    detail: str

    def to_json(self) -> dict:
        return {"lemma": self.lemma, "trace": [str(e) for e in self.trace], "detail": self.detail}


@dataclass
class LemmaReport:
    protocol: str
    depth: int
    checked: dict[str, int] = field(default_factory=dict)
    violations: list[LemmaViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, lemma: str, trace: tuple, detail: str) -> None:
        if not any(v.lemma == lemma for v in self.violations):
            self.violations.append(LemmaViolation(lemma, trace, detail))

    def tick(self, lemma: str, n: int = 1) -> None:
        self.checked[lemma] = self.checked.get(lemma, 0) + n

    def merge(self, other: "LemmaReport") -> "LemmaReport":
        for k, n in other.checked.items():
            self.tick(k, n)
        for v in other.violations:
            self.record(v.lemma, v.trace, v.detail)
        return self

    def to_json(self) -> dict:
        return {
            "protocol": self.protocol,
            "depth": self.depth,
            "ok": self.ok,
            "checked": self.checked,
            "violations": [v.to_json() for v in self.violations],
        }


def _count_key(m, s) -> tuple:
    if isinstance(s, _Broken):
        return ("broken", id(s))
    return (m, s.transparent, s.counts)


def _value_key(m, s) -> tuple:
    if isinstance(s, _Broken):
        return ("broken", id(s))
    return (m, s.stored, s.transparent, s.counts)


def check_rd_lemmas(
    c: Circuit, st0: Mapping[Latch, Value], depth: int, graph: MarkedGraph | None = None
) -> LemmaReport:
    """Rise-decoupled: forward-place opacity and fall-count alignment.

    (a) if ``l- -> l'-`` holds a token then ``l`` is opaque;
    (b) if ``l-`` is enabled then every left neighbor ``l'`` has fallen
        ``num(l-)`` times (``l`` odd) or ``num(l-) + 1`` times (``l`` even).
    """
    graph = graph or build_protocol(ProtocolKind.RISE, c)
    report = LemmaReport("rise", depth)
    fwd = [(l, r, graph.place(forward(l, r)).id) for l, r in c.pairs]
    root = AsyncState.initial(c, st0)
    for trace, m, s in explore(graph, root, _advance, depth, key=_count_key):
        if isinstance(s, _Broken):
            continue
        for l, r, pid in fwd:
            report.tick("rd-opacity")
            if m[pid] > 0 and s.transparent[c.index(l)]:
                report.record("rd-opacity", trace, f"place {graph.places[pid]} is marked but {l} is transparent")
        for l in c.latches:
            if not graph.is_enabled(m, Fall(l)):
                continue
            mine = s.num_events(Fall(l))
            want = mine if l.is_odd else mine + 1
            for lp in left_neighbors(c, l):
                report.tick("rd-num-events")
                got = s.num_events(Fall(lp))
                if got != want:
                    report.record(
                        "rd-num-events",
                        trace,
                        f"{l}- enabled with num({l}-)={mine} but num({lp}-)={got}, expected {want}",
                    )
    return report


def check_fd_lemmas(
    c: Circuit, st0: Mapping[Latch, Value], depth: int, graph: MarkedGraph | None = None
) -> LemmaReport:
    """Fall-decoupled: rise/fall count alignment, plus the strengthened value claim.

    fd-num-events (opaque): ``num(l-) = num(l+) + 1`` for odd ``l``, ``num(l+)`` for even.
    fd-num-events (transparent): for each left neighbor ``l'``,
    ``num(l+) = num(l'+)`` for odd ``l``, ``num(l'+) + 1`` for even.
    fd-strong: every latch, transparent or opaque, holds the synchronous value
    at cycle ``num(l+)`` (even) or ``num(l+) + 1`` (odd).
    """
    graph = graph or build_protocol(ProtocolKind.FALL, c)
    report = LemmaReport("fall", depth)
    sync = SyncRun(c, st0)
    root = AsyncState.initial(c, st0)
    for trace, m, s in explore(graph, root, _advance, depth, key=_value_key):
        if isinstance(s, _Broken):
            report.record("fd-strong", trace, str(s.error))
            continue
        for i, l in enumerate(c.latches):
            rises = s.num_events(Rise(l))
            if not s.transparent[i]:
                report.tick("fd-num-events/opaque")
                falls = s.num_events(Fall(l))
                want = rises + 1 if l.is_odd else rises
                if falls != want:
                    report.record(
                        "fd-num-events/opaque", trace, f"{l} opaque with num({l}-)={falls}, num({l}+)={rises}"
                    )
            else:
                for lp in left_neighbors(c, l):
                    report.tick("fd-num-events/transparent")
                    theirs = s.num_events(Rise(lp))
                    want = theirs if l.is_odd else theirs + 1
                    if rises != want:
                        report.record(
                            "fd-num-events/transparent",
                            trace,
                            f"{l} transparent with num({l}+)={rises} but num({lp}+)={theirs}",
                        )
            report.tick("fd-strong")
            cycle = rises + 1 if l.is_odd else rises
            try:
                v = current_value(s, l)
            except EvalError as err:
                report.record("fd-strong", trace, str(err))
                continue
            expected = sync.value(cycle, l)
            if v != expected:
                report.record("fd-strong", trace, f"{l} holds {v}, synchronous cycle {cycle} gives {expected}")
    return report


def bounded_markings(graph: MarkedGraph, depth: int) -> dict:
    """Markings reachable within ``depth`` firings, each with a shortest trace."""
    markings = {graph.init_marking: ()}
    frontier = [graph.init_marking]
    for _ in range(depth):
        nxt = []
        for m in frontier:
            for e in graph.enabled(m):
                m2 = graph.fire(m, e)
                if m2 not in markings:
                    markings[m2] = markings[m] + (e,)
                    nxt.append(m2)
        frontier = nxt
    return markings


def check_marked_graph_lemmas(graph: MarkedGraph, depth: int, name: str = "", path_len: int = 3) -> LemmaReport:
    """Cycle conservation, 1-safety and the single-firing path algebra.

    Every elementary cycle keeps its initial token sum at every marking
    reachable within ``depth`` firings, and no place ever holds two tokens.
    For each such marking, each enabled transition and each path of up to
    ``path_len`` places (plus every elementary cycle), firing changes the
    path's sum by +1 if the path starts at the transition, -1 if it ends
    there, and 0 otherwise.
    """
    report = LemmaReport(name, depth)
    cycles = graph.simple_cycles()
    paths = graph.simple_paths(path_len) + cycles
    init_sums = [sum(graph.init_marking[p] for p in cyc) for cyc in cycles]
    ends = [graph.path_ends(p) for p in paths]
    markings = bounded_markings(graph, depth)

    for m, trace in markings.items():
        report.tick("one-safety")
        if max(m, default=0) > 1:
            full = [str(graph.places[i]) for i, x in enumerate(m) if x > 1]
            report.record("one-safety", trace, f"places {', '.join(full)} hold more than one token")
        for cyc, want in zip(cycles, init_sums):
            report.tick("cycle-conservation")
            got = sum(m[p] for p in cyc)
            if got != want:
                desc = " ".join(str(graph.places[p]) for p in cyc)
                report.record("cycle-conservation", trace, f"cycle [{desc}] sums to {got}, initially {want}")
        for e in graph.enabled(m):
            m2 = graph.fire(m, e)
            for path, (start, end) in zip(paths, ends):
                report.tick("firing-algebra")
                delta = sum(m2[p] for p in path) - sum(m[p] for p in path)
                want = helper_lemma_delta(graph, path, e)
                if delta != want:
                    desc = " ".join(str(graph.places[p]) for p in path)
                    report.record("firing-algebra", trace + (e,), f"firing {e} moved [{desc}] by {delta}, expected {want}")
    return report


def check_local_cycles(kind: ProtocolKind, c: Circuit, graph: MarkedGraph, depth: int) -> LemmaReport:
    """Each latch's self cycle and each pair's cycle stay directed cycles holding one token.

    The tagged places are looked up by kind, so a graph whose forward place
    was redirected is caught here even if it merely deadlocks.
    """
    report = LemmaReport(kind.value, depth)
    named = [(str(l), self_cycle(l)) for l in c.latches]
    named += [(f"{l},{r}", pair_cycle(kind, l, r)) for l, r in c.pairs]
    live = []
    for label, tags in named:
        ids = tag_ids(graph, tags)
        report.tick("local-cycles")
        chained = all(graph.places[a].dst == graph.places[b].src for a, b in zip(ids, ids[1:] + ids[:1]))
        if not chained:
            desc = ", ".join(str(graph.places[i]) for i in ids)
            report.record("local-cycles", (), f"places {desc} of ({label}) no longer form a cycle")
        else:
            live.append((label, ids))
    for m, trace in bounded_markings(graph, depth).items():
        for label, ids in live:
            report.tick("local-cycles")
            total = sum(m[i] for i in ids)
            if total != 1:
                report.record("local-cycles", trace, f"cycle of ({label}) holds {total} tokens, expected 1")
    return report


def check_protocol_lemmas(
    kind: ProtocolKind, c: Circuit, st0: Mapping[Latch, Value], depth: int, graph: MarkedGraph | None = None
) -> LemmaReport:
    graph = graph or build_protocol(kind, c)
    report = check_marked_graph_lemmas(graph, depth, kind.value)
    report.protocol = kind.value
    report.merge(check_local_cycles(kind, c, graph, depth))
    if kind is ProtocolKind.RISE:
        report.merge(check_rd_lemmas(c, st0, depth, graph))
    elif kind is ProtocolKind.FALL:
        report.merge(check_fd_lemmas(c, st0, depth, graph))
    return report
