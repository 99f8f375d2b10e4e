"""Shared fixtures data and Hypothesis strategies for the test suite."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from hypothesis import strategies as st

from flowequiv.asyncexec import EvalError
from flowequiv.model import Fall, Rise
from flowequiv.netlist import build_circuit, load_circuit, parse_trace

CIRCUITS_DIR = Path(__file__).resolve().parent.parent / "circuits"
CIRCUIT_NAMES = ("cex", "ring2", "pipe3")

# the counterexample trace, oldest event first
TC_TEXT = "SNK- C+ B- C- SNK+ SNK- C+ B+ C-"


@lru_cache(maxsize=None)
def load(name: str):
    return load_circuit((CIRCUITS_DIR / f"{name}.json").read_bytes())


def tc():
    c, _ = load("cex")
    return parse_trace(c, TC_TEXT)


def outcome(fn):
    """Value, or the error class name, so two evaluators can be compared."""
    try:
        return ("ok", fn())
    except EvalError as err:
        return ("error", type(err).__name__)


def _expr(refs: list[str], depth: int):
    leaves = [st.integers(0, 3).map(str), st.just("X")] + ([st.sampled_from(refs)] if refs else [])
    base = st.one_of(*leaves)
    if depth == 0:
        return base
    return st.one_of(base, _expr(refs, depth - 1).map(lambda s: f"inc({s})"))


@st.composite
def circuits(draw, max_per_side: int = 3):
    """Random well-formed circuits with parity-respecting neighbor pairs."""
    ne = draw(st.integers(1, max_per_side))
    no = draw(st.integers(1, max_per_side))
    evens = [f"E{i}" for i in range(ne)]
    odds = [f"O{i}" for i in range(no)]
    eo_all = [[e, o] for e in evens for o in odds]
    oe_all = [[o, e] for o in odds for e in evens]
    eo = draw(st.lists(st.sampled_from(eo_all), unique_by=tuple, min_size=1))
    oe = draw(st.lists(st.sampled_from(oe_all), unique_by=tuple, min_size=1))
    left = {n: [a for a, b in eo + oe if b == n] for n in evens + odds}
    ns = {n: draw(_expr(left[n], 2)) for n in evens + odds}
    initial = {e: draw(st.one_of(st.just("X"), st.integers(0, 5).map(str))) for e in evens}
    return build_circuit(evens, odds, eo, oe, ns, initial)


@st.composite
def circuit_and_trace(draw, max_len: int = 12):
    c, st0 = draw(circuits())
    events = [e for l in c.latches for e in (Rise(l), Fall(l))]
    t = tuple(draw(st.lists(st.sampled_from(events), max_size=max_len)))
    return c, st0, t


def fall(c, name):
    return Fall(c.latch(name))


def rise(c, name):
    return Rise(c.latch(name))
