import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowequiv.asyncexec import TraceOracle, run_trace
from flowequiv.flow import (
    CyclicTransparencyFinding,
    Included,
    Pass,
    TransferRefused,
    ViolationReport,
    Witness,
    check_flow_equivalence,
    check_refinement,
    replay_violation,
    transfer_flow_equivalence,
    witness_replays,
)
from flowequiv.markedgraph import Final, MarkedGraphError
from flowequiv.model import OPAQUE, X, Fall, transparency
from flowequiv.protocols import ProtocolKind, build_protocol, derive_markings
from flowequiv.sync import SyncRun
from support import CIRCUIT_NAMES, load

DESYNC, RISE, FALL = ProtocolKind.DESYNC, ProtocolKind.RISE, ProtocolKind.FALL


def brute_force_verdict(c, st0, graph, depth):
    """First violating admitted trace in DFS order, judged with the direct evaluator."""
    sync = SyncRun(c, st0)
    for t, _ in graph.enumerate_traces(depth):
        o = TraceOracle(c, st0, t)
        for l in c.latches:
            if transparency(t, l) is not OPAQUE:
                continue
            falls = sum(1 for e in t if e == Fall(l))
            if o.value(l) != sync.value(falls, l):
                return t, l
    return None


def test_cex_desync_violation():
    c, st0 = load("cex")
    v = check_flow_equivalence(c, st0, DESYNC, 9)
    assert isinstance(v, ViolationReport)
    assert v.latch == c.latch("C")
    assert (v.got, v.expected, v.fall_count) == (1, 2, 2)
    assert replay_violation(c, st0, build_protocol(DESYNC, c), v)
    assert " ".join(map(str, v.trace)) == "B- SNK- C+ C- B+ SNK+ SNK- C+ C-"


def test_first_violation_matches_brute_force():
    c, st0 = load("cex")
    v = check_flow_equivalence(c, st0, DESYNC, 9, reduce=False)
    t, l = brute_force_verdict(c, st0, build_protocol(DESYNC, c), 9)
    assert (v.trace, v.latch) == (t, l)


def test_shortest_violation():
    c, st0 = load("cex")
    v = check_flow_equivalence(c, st0, DESYNC, 9, shortest=True)
    assert isinstance(v, ViolationReport)
    assert len(v.trace) == 9
    # no violation exists below nine events
    assert isinstance(check_flow_equivalence(c, st0, DESYNC, 8), Pass)


def test_pipe3_desync_violation():
    c, st0 = load("pipe3")
    v = check_flow_equivalence(c, st0, DESYNC, 12)
    assert isinstance(v, ViolationReport)
    assert replay_violation(c, st0, build_protocol(DESYNC, c), v)


def test_ring2_desync_passes():
    c, st0 = load("ring2")
    assert isinstance(check_flow_equivalence(c, st0, DESYNC, 12), Pass)


@pytest.mark.parametrize("name", CIRCUIT_NAMES)
@pytest.mark.parametrize("kind", [RISE, FALL])
def test_decoupled_protocols_pass(name, kind):
    c, st0 = load(name)
    v = check_flow_equivalence(c, st0, kind, 10)
    assert isinstance(v, Pass)
    assert v.protocol == kind.value


@pytest.mark.parametrize("name", CIRCUIT_NAMES)
@pytest.mark.parametrize("kind", list(ProtocolKind))
def test_reduction_preserves_verdicts(name, kind):
    c, st0 = load(name)
    a = check_flow_equivalence(c, st0, kind, 8, reduce=True)
    b = check_flow_equivalence(c, st0, kind, 8, reduce=False)
    assert type(a) is type(b)
    if isinstance(a, ViolationReport):
        assert a == b


@pytest.mark.parametrize("kind", list(ProtocolKind))
def test_reduced_pass_agrees_with_brute_force(kind):
    c, st0 = load("pipe3")
    v = check_flow_equivalence(c, st0, kind, 7)
    assert isinstance(v, Pass) == (brute_force_verdict(c, st0, build_protocol(kind, c), 7) is None)


def test_parallel_workers_agree(monkeypatch):
    c, st0 = load("cex")
    serial = check_flow_equivalence(c, st0, DESYNC, 9, workers=0)
    assert check_flow_equivalence(c, st0, DESYNC, 9, workers=2) == serial
    monkeypatch.setenv("FE_THREADS", "2")
    assert isinstance(check_flow_equivalence(c, st0, RISE, 8), Pass)


def test_depth_monotonicity():
    c, st0 = load("cex")
    verdicts = [check_flow_equivalence(c, st0, DESYNC, d) for d in range(1, 12)]
    first_bad = next(i for i, v in enumerate(verdicts) if not isinstance(v, Pass))
    assert all(isinstance(v, Pass) for v in verdicts[:first_bad])
    assert all(isinstance(v, ViolationReport) for v in verdicts[first_bad:])


def test_bad_depth():
    c, st0 = load("ring2")
    with pytest.raises(ValueError):
        check_flow_equivalence(c, st0, RISE, 0)


def test_cyclic_transparency_finding():
    # the other desync marking allowed on a ring moves the O->E token onto the
    # backward place, which lets E and O be transparent at the same time
    c, st0 = load("ring2")
    g = build_protocol(DESYNC, c)
    alt = next(m for m in derive_markings(DESYNC, c) if m != g.init_marking)
    v = check_flow_equivalence(c, st0, g.with_marking(dict(enumerate(alt))), 6)
    assert isinstance(v, CyclicTransparencyFinding)
    assert [str(e) for e in v.trace] == ["O-", "E+", "O+", "E-"]
    assert {l.name for l in v.cycle} == {"E", "O"}
    assert v.to_json()["verdict"] == "cyclic-transparency"


def test_violation_json():
    c, st0 = load("cex")
    doc = check_flow_equivalence(c, st0, DESYNC, 9).to_json()
    assert doc["verdict"] == "violation"
    assert (doc["latch"], doc["got"], doc["expected"], doc["fall_count"]) == ("C", 1, 2, 2)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CIRCUIT_NAMES), st.sampled_from(list(ProtocolKind)), st.integers(1, 7))
def test_violations_always_replay(name, kind, depth):
    c, st0 = load(name)
    v = check_flow_equivalence(c, st0, kind, depth)
    if isinstance(v, ViolationReport):
        assert replay_violation(c, st0, build_protocol(kind, c), v)
        assert run_trace(c, st0, v.trace).stored[c.index(v.latch)] == v.got


# refinement


@pytest.mark.parametrize("name", CIRCUIT_NAMES)
@pytest.mark.parametrize("kind", [RISE, FALL])
def test_decoupled_refine_desync(name, kind):
    c, _ = load(name)
    r = check_refinement(build_protocol(kind, c), build_protocol(DESYNC, c))
    assert isinstance(r, Included)
    assert r.pairs > 0


def test_desync_does_not_refine_rise():
    c, _ = load("cex")
    left, right = build_protocol(DESYNC, c), build_protocol(RISE, c)
    w = check_refinement(left, right)
    assert isinstance(w, Witness)
    assert witness_replays(left, right, w)
    assert [str(e) for e in w.trace] + [str(w.event)] == ["SNK-", "C+", "C-"]


@pytest.mark.parametrize("name", CIRCUIT_NAMES)
@pytest.mark.parametrize("kind", [RISE, FALL])
def test_refinement_cross_checked_by_enumeration(name, kind):
    c, _ = load(name)
    left, right = build_protocol(kind, c), build_protocol(DESYNC, c)
    for t, _ in left.enumerate_traces(8):
        assert isinstance(right.admits(t), Final)


def test_refinement_needs_same_transitions():
    ca, _ = load("cex")
    cb, _ = load("ring2")
    with pytest.raises(MarkedGraphError):
        check_refinement(build_protocol(RISE, ca), build_protocol(RISE, cb))


def test_refinement_is_reflexive():
    c, _ = load("pipe3")
    for kind in ProtocolKind:
        g = build_protocol(kind, c)
        assert isinstance(check_refinement(g, g), Included)


def test_transfer():
    c, st0 = load("ring2")
    r = check_refinement(build_protocol(RISE, c), build_protocol(DESYNC, c))
    base = check_flow_equivalence(c, st0, DESYNC, 8)
    note = transfer_flow_equivalence(r, base, "rise")
    assert note.inherited_from == "desync" and note.depth == 8
    assert "inherited" in str(note)


def test_transfer_refused():
    c, st0 = load("cex")
    r = check_refinement(build_protocol(RISE, c), build_protocol(DESYNC, c))
    bad = check_flow_equivalence(c, st0, DESYNC, 9)
    with pytest.raises(TransferRefused):
        transfer_flow_equivalence(r, bad, "rise")
    w = check_refinement(build_protocol(DESYNC, c), build_protocol(RISE, c))
    with pytest.raises(TransferRefused):
        transfer_flow_equivalence(w, Pass("rise", 9), "desync")


def test_x_values_are_compared_exactly():
    c, st0 = load("cex")
    assert SyncRun(c, st0).value(0, c.latch("C")) is X
