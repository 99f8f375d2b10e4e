"""Circuit description files and the next-state expression language.

Expression grammar::

    expr ::= "X" | NAT | IDENT | "inc" "(" expr ")"

Whitespace is insignificant. ``inc`` and ``X`` are reserved.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .model import (
    Circuit,
    Edge,
    Event,
    Latch,
    Parity,
    Trace,
    Value,
    X,
    left_neighbors,
    right_neighbors,
)

log = logging.getLogger(__name__)

RESERVED = frozenset({"inc", "X"})
CIRCUIT_KEYS = ("evens", "odds", "even_odd_neighbors", "odd_even_neighbors", "next_state", "initial")


class CircuitError(ValueError):
    pass


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class TraceSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Inc:
    arg: "Expr"


Expr = Union[Lit, Ref, Inc]


_TOKEN = re.compile(r"\s*(?:(?P<nat>[0-9]+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[()]))")


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def _next(self) -> tuple[str, str, int]:
        self._skip_ws()
        start = self.pos
        if start >= len(self.src):
            return "eof", "", start
        m = _TOKEN.match(self.src, start)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {self.src[start]!r}", start)
        self.pos = m.end()
        kind = m.lastgroup
        return kind, m.group(kind), start

    def expr(self) -> Expr:
        kind, text, at = self._next()
        if kind == "nat":
            return Lit(int(text))
        if kind == "ident":
            if text == "X":
                return Lit(X)
            if text == "inc":
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Inc(arg)
            return Ref(text)
        if kind == "eof":
            raise ExprSyntaxError("unexpected end of input", at)
        raise ExprSyntaxError(f"unexpected {text!r}", at)

    def _expect(self, punct: str) -> None:
        kind, text, at = self._next()
        if kind == "eof":
            raise ExprSyntaxError(f"expected {punct!r}, got end of input", at)
        if text != punct:
            raise ExprSyntaxError(f"expected {punct!r}, got {text!r}", at)

    def done(self) -> None:
        kind, text, at = self._next()
        if kind != "eof":
            raise ExprSyntaxError(f"trailing input {text!r}", at)


def parse_expr(src: str) -> Expr:
    p = _Parser(src)
    e = p.expr()
    p.done()
    return e


def format_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        return "X" if e.value is X else str(e.value)
    if isinstance(e, Ref):
        return e.name
    return f"inc({format_expr(e.arg)})"


def inc_value(v: Value) -> Value:
    # inc(X) = 0: an all-X initial state must still produce a defined stream.
    return 0 if v is X else v + 1


def eval_expr(e: Expr, env: Mapping[str, Value]) -> Value:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Ref):
        try:
            return env[e.name]
        except KeyError:
            raise KeyError(f"unresolved reference {e.name!r}") from None
    return inc_value(eval_expr(e.arg, env))


def expr_refs(e: Expr) -> set[str]:
    if isinstance(e, Ref):
        return {e.name}
    if isinstance(e, Inc):
        return expr_refs(e.arg)
    return set()


def next_state(c: Circuit, l: Latch, env: Mapping[str, Value]) -> Value:
    """Evaluate ``l``'s next-state function on left-neighbor values keyed by name."""
    return eval_expr(c.next_state[l], env)


def parse_value(v: object) -> Value:
    if isinstance(v, bool):
        raise CircuitError(f"invalid value {v!r}")
    if isinstance(v, int) and v >= 0:
        return v
    if isinstance(v, str):
        s = v.strip()
        if s == "X":
            return X
        if s.isdigit():
            return int(s)
    raise CircuitError(f"invalid value {v!r} (expected 'X' or a natural number)")


def _name_list(doc: dict, key: str) -> list[str]:
    names = doc.get(key)
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise CircuitError(f"{key!r} must be a list of names")
    return names


def build_circuit(
    evens: list[str],
    odds: list[str],
    even_odd_neighbors: list,
    odd_even_neighbors: list,
    next_state: Mapping[str, str],
    initial: Mapping[str, object] | None = None,
) -> tuple[Circuit, dict[Latch, Value]]:
    """Validate raw circuit data and return ``(circuit, st0)``."""
    latches: dict[str, Latch] = {}
    for names, parity in ((evens, Parity.EVEN), (odds, Parity.ODD)):
        for n in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n):
                raise CircuitError(f"invalid latch name {n!r}")
            if n in RESERVED:
                raise CircuitError(f"latch name {n!r} is reserved")
            if n in latches:
                raise CircuitError(f"duplicate latch name {n!r}")
            latches[n] = Latch(parity, n)

    def pairs(raw: list, key: str, left: Parity, right: Parity) -> tuple:
        out = []
        seen = set()
        for item in raw:
            if not (isinstance(item, (list, tuple)) and len(item) == 2):
                raise CircuitError(f"{key}: malformed pair {item!r}")
            a, b = item
            for n in (a, b):
                if n not in latches:
                    raise CircuitError(f"{key}: pair {[a, b]} references undeclared latch {n!r}")
            la, lb = latches[a], latches[b]
            if la.parity is not left or lb.parity is not right:
                raise CircuitError(
                    f"{key}: parity violation in pair {[a, b]} "
                    f"(expected {left.value}-{right.value}, got {la.parity.value}-{lb.parity.value})"
                )
            if (la, lb) in seen:
                raise CircuitError(f"{key}: duplicate pair {[a, b]}")
            seen.add((la, lb))
            out.append((la, lb))
        return tuple(out)

    eo = pairs(even_odd_neighbors, "even_odd_neighbors", Parity.EVEN, Parity.ODD)
    oe = pairs(odd_even_neighbors, "odd_even_neighbors", Parity.ODD, Parity.EVEN)

    exprs: dict[Latch, Expr] = {}
    for n in next_state:
        if n not in latches:
            raise CircuitError(f"next_state given for undeclared latch {n!r}")
    for n, l in latches.items():
        if n not in next_state:
            raise CircuitError(f"missing next_state entry for latch {n!r}")
        src = next_state[n]
        if not isinstance(src, str):
            src = str(src)
        try:
            exprs[l] = parse_expr(src)
        except ExprSyntaxError as exc:
            raise CircuitError(f"next_state[{n!r}]: {exc}") from exc

    c = Circuit(
        evens=tuple(latches[n] for n in evens),
        odds=tuple(latches[n] for n in odds),
        even_odd_neighbors=eo,
        odd_even_neighbors=oe,
        next_state=exprs,
    )
    for l, e in exprs.items():
        allowed = {x.name for x in left_neighbors(c, l)}
        for ref in sorted(expr_refs(e)):
            if ref not in allowed:
                raise CircuitError(
                    f"next_state[{l.name!r}] references {ref!r}, which is not a left neighbor of {l.name!r}"
                )

    st0: dict[Latch, Value] = {l: X for l in c.latches}
    for n, v in (initial or {}).items():
        if n not in latches:
            raise CircuitError(f"initial value for undeclared latch {n!r}")
        if latches[n].is_odd:
            raise CircuitError(f"initial value given for odd latch {n!r}; odd latches start undefined")
        st0[latches[n]] = parse_value(v)

    for w in lint_circuit(c):
        log.warning(w)
    return c, st0


def lint_circuit(c: Circuit) -> list[str]:
    """Non-fatal findings about a validated circuit."""
    return [
        f"latch {l.name!r} has no right neighbor and never back-pressures a producer"
        for l in c.latches
        if not right_neighbors(c, l)
    ]


def load_circuit(data: bytes | str) -> tuple[Circuit, dict[Latch, Value]]:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CircuitError(f"circuit file is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CircuitError("circuit file must contain a JSON object")
    unknown = set(doc) - set(CIRCUIT_KEYS)
    if unknown:
        raise CircuitError(f"unknown keys: {sorted(unknown)}")
    for key in CIRCUIT_KEYS[:-1]:
        if key not in doc:
            raise CircuitError(f"missing key {key!r}")
    for key in ("even_odd_neighbors", "odd_even_neighbors"):
        if not isinstance(doc[key], list):
            raise CircuitError(f"{key!r} must be a list of pairs")
    if not isinstance(doc["next_state"], dict):
        raise CircuitError("'next_state' must be an object")
    initial = doc.get("initial") or {}
    if not isinstance(initial, dict):
        raise CircuitError("'initial' must be an object")
    return build_circuit(
        _name_list(doc, "evens"),
        _name_list(doc, "odds"),
        doc["even_odd_neighbors"],
        doc["odd_even_neighbors"],
        doc["next_state"],
        initial,
    )


def circuit_to_json(c: Circuit, st0: Mapping[Latch, Value] | None = None) -> dict:
    initial = {}
    for l, v in (st0 or {}).items():
        if l.is_even and v is not X:
            initial[l.name] = str(v)
    return {
        "evens": [l.name for l in c.evens],
        "odds": [l.name for l in c.odds],
        "even_odd_neighbors": [[a.name, b.name] for a, b in c.even_odd_neighbors],
        "odd_even_neighbors": [[a.name, b.name] for a, b in c.odd_even_neighbors],
        "next_state": {l.name: format_expr(c.next_state[l]) for l in c.latches},
        "initial": initial,
    }


_EVENT_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)([+\-−])")


def parse_event(c: Circuit, token: str) -> Event:
    m = _EVENT_TOKEN.fullmatch(token)
    if m is None:
        raise TraceSyntaxError(f"malformed event {token!r} (expected NAME+ or NAME-)")
    name, sign = m.groups()
    try:
        l = c.latch(name)
    except KeyError:
        raise TraceSyntaxError(f"event {token!r} names unknown latch {name!r}") from None
    return Event(Edge.RISE if sign == "+" else Edge.FALL, l)


def parse_trace(c: Circuit, text: str) -> Trace:
    """Parse a trace file.

    Accepts whitespace-separated ``NAME+`` / ``NAME-`` tokens, or a JSON
    report carrying a ``"trace"`` token list (as written by ``fe check --json``).
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TraceSyntaxError(f"invalid JSON trace report: {exc}") from exc
        tokens = doc.get("trace")
        if tokens is None and isinstance(doc.get("witness"), dict):
            tokens = doc["witness"].get("trace")
        if not isinstance(tokens, list):
            raise TraceSyntaxError("JSON report has no 'trace' token list")
    else:
        tokens = text.split()
    return tuple(parse_event(c, tok) for tok in tokens)


def trace_tokens(t: Trace) -> list[str]:
    return [str(e) for e in t]
