import pytest

from flowequiv.lemmas import (
    LemmaReport,
    check_fd_lemmas,
    check_local_cycles,
    check_marked_graph_lemmas,
    check_protocol_lemmas,
    check_rd_lemmas,
)
from flowequiv.markedgraph import MarkedGraph
from flowequiv.protocols import ProtocolKind, build_protocol, forward
from support import CIRCUIT_NAMES, load

RISE, FALL = ProtocolKind.RISE, ProtocolKind.FALL


def mutate(kind, c, pair, how):
    g = build_protocol(kind, c)
    pid = g.place(forward(c.latch(pair[0]), c.latch(pair[1]))).id
    if how == "flip":
        return g.with_marking({pid: 1 - g.init_marking[pid]})
    return g.with_place_reversed(pid)


@pytest.mark.parametrize("name", CIRCUIT_NAMES)
def test_rd_lemmas_hold(name):
    c, st0 = load(name)
    report = check_rd_lemmas(c, st0, 10)
    assert report.ok, report.violations
    assert report.checked["rd-opacity"] > 0
    assert report.checked["rd-num-events"] > 0


@pytest.mark.parametrize("name", CIRCUIT_NAMES)
def test_fd_lemmas_hold(name):
    c, st0 = load(name)
    report = check_fd_lemmas(c, st0, 10)
    assert report.ok, report.violations
    assert set(report.checked) == {"fd-num-events/opaque", "fd-num-events/transparent", "fd-strong"}


@pytest.mark.parametrize("name", CIRCUIT_NAMES)
@pytest.mark.parametrize("kind", list(ProtocolKind))
def test_protocol_suites_hold(name, kind):
    c, st0 = load(name)
    report = check_protocol_lemmas(kind, c, st0, 8)
    assert report.ok, report.violations
    assert {"cycle-conservation", "firing-algebra", "one-safety", "local-cycles"} <= set(report.checked)


@pytest.mark.parametrize(
    "name, kind, pair, how, expected",
    [
        ("cex", RISE, ("B", "C"), "flip", {"rd-num-events", "rd-opacity"}),
        ("cex", RISE, ("A", "B"), "reverse", {"rd-num-events", "rd-opacity"}),
        ("cex", RISE, ("SRC", "A"), "flip", {"rd-opacity"}),
        ("ring2", RISE, ("O", "E"), "flip", {"rd-opacity"}),
        ("ring2", RISE, ("E", "O"), "reverse", {"rd-opacity"}),
        ("pipe3", RISE, ("B", "C"), "flip", {"rd-num-events", "rd-opacity"}),
        ("cex", FALL, ("A", "B"), "flip", {"fd-num-events/transparent", "fd-strong"}),
        ("cex", FALL, ("B", "C"), "reverse", {"fd-num-events/transparent", "fd-strong"}),
        ("pipe3", FALL, ("A", "B"), "reverse", {"fd-num-events/transparent", "fd-strong"}),
        ("pipe3", FALL, ("SRC", "A"), "reverse", {"fd-num-events/transparent"}),
    ],
)
def test_mutations_break_protocol_lemmas(name, kind, pair, how, expected):
    c, st0 = load(name)
    g = mutate(kind, c, pair, how)
    check = check_rd_lemmas if kind is RISE else check_fd_lemmas
    found = {v.lemma for v in check(c, st0, 10, g).violations}
    assert found == expected


@pytest.mark.parametrize(
    "name, kind, pair, how",
    [
        # these only deadlock the graph: the count and value lemmas stay silent
        ("cex", RISE, ("A", "B"), "flip"),
        ("cex", RISE, ("SRC", "A"), "reverse"),
        ("ring2", FALL, ("O", "E"), "flip"),
        ("ring2", FALL, ("E", "O"), "reverse"),
    ],
)
def test_deadlocking_mutations_caught_by_local_cycles(name, kind, pair, how):
    c, st0 = load(name)
    g = mutate(kind, c, pair, how)
    check = check_rd_lemmas if kind is RISE else check_fd_lemmas
    assert check(c, st0, 10, g).ok
    assert not check_local_cycles(kind, c, g, 10).ok


def test_unsafe_mutation_reported():
    c, st0 = load("cex")
    g = mutate(FALL, c, ("A", "SRC"), "flip")
    report = check_marked_graph_lemmas(g, 10, "fall")
    assert {v.lemma for v in report.violations} == {"one-safety"}


def test_overtokened_cycle_is_conserved_but_unsafe():
    g = MarkedGraph(["a", "b"], [("a", "b"), ("b", "a")], [1, 1])
    report = check_marked_graph_lemmas(g, 4)
    assert "cycle-conservation" not in {v.lemma for v in report.violations}
    assert "one-safety" in {v.lemma for v in report.violations}


def test_report_keeps_first_violation_per_lemma():
    r = LemmaReport("x", 1)
    r.record("a", (), "first")
    r.record("a", (), "second")
    r.record("b", (), "other")
    assert [v.detail for v in r.violations] == ["first", "other"]
    merged = LemmaReport("x", 1).merge(r)
    assert not merged.ok
    assert merged.to_json()["violations"][0]["lemma"] == "a"
