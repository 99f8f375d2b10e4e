"""ASCII/Unicode timing diagrams of clock traces."""

from __future__ import annotations

from typing import Mapping, Sequence

from .asyncexec import AsyncState, EvalError, current_value, step
from .model import Circuit, Event, Latch, Value, format_value

HIGH = "‾"
LOW = "_"


def render_waveform(c: Circuit, st0: Mapping[Latch, Value], t: Sequence[Event]) -> str:
    """One row per latch: ``/`` at a rise, ``\\`` at a fall, ``‾`` while
    transparent, ``_`` while opaque. The value latched at each fall is printed
    underneath it. Column 0 is the initial state; column ``k + 1`` is event ``k``.
    """
    states = [AsyncState.initial(c, st0)]
    notes: dict[int, str] = {}
    latched: dict[int, str] = {}
    broken = False
    for k, e in enumerate(t):
        prev = states[-1]
        nxt = None
        if not broken:
            try:
                nxt = step(prev, e)
            except EvalError as err:
                notes[k] = str(err)
                broken = True
        if nxt is None:
            nxt = _phase_step(prev, e)
        if e.is_fall:
            latched[k] = "?" if broken else format_value(nxt.stored[c.index(e.latch)])
        states.append(nxt)

    tokens = [str(e) for e in t]
    width = max([4] + [len(x) + 1 for x in tokens] + [len(x) + 1 for x in latched.values()])
    label = max([len(l.name) for l in c.latches] + [5]) + 1

    lines = [" " * label + "init".ljust(width) + "".join(x.ljust(width) for x in tokens)]
    for l in c.latches:
        i = c.index(l)
        row = [(HIGH if states[0].transparent[i] else LOW) * width]
        marks = [" " * width]
        any_mark = False
        for k, e in enumerate(t):
            level = HIGH if states[k + 1].transparent[i] else LOW
            if e.latch == l and e.is_rise:
                row.append("/" + level * (width - 1))
                marks.append(" " * width)
            elif e.latch == l:
                row.append("\\" + level * (width - 1))
                marks.append(latched[k].ljust(width))
                any_mark = True
            else:
                row.append(level * width)
                marks.append(" " * width)
        lines.append(l.name.ljust(label) + "".join(row))
        if any_mark:
            lines.append(" " * label + "".join(marks).rstrip())
    for k, msg in sorted(notes.items()):
        lines.append(f"? at event {k} ({tokens[k]}): {msg}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _phase_step(s: AsyncState, e: Event) -> AsyncState:
    # after an evaluation error only the clock phases are tracked
    i = s.circuit.index(e.latch)
    transparent = list(s.transparent)
    transparent[i] = e.is_rise
    return AsyncState(s.circuit, s.stored, tuple(transparent), s.counts)


def render_values(c: Circuit, s: AsyncState) -> dict[str, str]:
    out = {}
    for l in c.latches:
        try:
            out[l.name] = format_value(current_value(s, l))
        except EvalError:
            out[l.name] = "?"
    return out
