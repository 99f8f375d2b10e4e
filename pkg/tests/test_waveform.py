from flowequiv.netlist import parse_trace
from flowequiv.waveform import render_waveform
from support import load, tc


def rows(text):
    return text.splitlines()


def test_tc_waveform():
    c, st0 = load("cex")
    lines = rows(render_waveform(c, st0, tc()))
    assert lines[0].split() == ["init"] + [str(e) for e in tc()]
    c_row = next(i for i, line in enumerate(lines) if line.startswith("C "))
    assert lines[c_row].count("/") == 2
    assert lines[c_row].count("\\") == 2
    # both falls of C latch 1
    assert lines[c_row + 1].split() == ["1", "1"]
    b_row = next(i for i, line in enumerate(lines) if line.startswith("B "))
    assert lines[b_row + 1].split() == ["0"]


def test_levels_follow_phase():
    c, st0 = load("ring2")
    t = parse_trace(c, "O- E+ E-")
    lines = rows(render_waveform(c, st0, t))
    e_row = next(line for line in lines if line.startswith("E "))
    o_row = next(line for line in lines if line.startswith("O "))
    # E starts opaque, O transparent
    assert e_row.split()[1].startswith("_")
    assert "‾" in o_row.split()[1]
    assert o_row.rstrip().endswith("_")


def test_latch_without_events_is_flat():
    c, st0 = load("cex")
    lines = rows(render_waveform(c, st0, tc()))
    a_row = next(line for line in lines if line.startswith("A "))
    assert set(a_row[1:].strip()) == {"_"}


def test_error_marks_and_footnote():
    c, st0 = load("ring2")
    t = parse_trace(c, "E+ O-")
    text = render_waveform(c, st0, t)
    assert "?" in text
    assert "? at event 1 (O-)" in text
    assert "combinational cycle" in text


def test_empty_trace():
    c, st0 = load("ring2")
    lines = rows(render_waveform(c, st0, ()))
    assert lines[0].strip() == "init"
    assert len(lines) == 3
