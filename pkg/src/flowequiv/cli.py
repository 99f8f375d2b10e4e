"""``fe``: command-line front end.

Exit status: 0 when the property holds or the command succeeded, 1 when a
violation, rejection or refinement witness was found, 2 on usage, parse or
validation errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .asyncexec import EvalError, run_trace
from .flow import (
    DEFAULT_DEPTH,
    CyclicTransparencyFinding,
    Pass,
    TransferRefused,
    ViolationReport,
    Witness,
    check_flow_equivalence,
    check_refinement,
    transfer_flow_equivalence,
)
from .lemmas import check_protocol_lemmas
from .markedgraph import Final
from .model import format_value, value_to_json
from .netlist import CircuitError, TraceSyntaxError, lint_circuit, load_circuit, parse_trace
from .protocols import ProtocolKind, build_protocol
from .sync import sync_table
from .waveform import render_values, render_waveform

PROTOCOLS = [k.value for k in ProtocolKind]


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fe", description="Flow-equivalence checking for desynchronized latch circuits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("circuit", type=Path, help="circuit description (JSON)")
        p.add_argument("--json", action="store_true", help="machine-readable report on stdout")
        return p

    command("validate", "load and validate a circuit")
    p = command("sync", "print the synchronous execution table")
    p.add_argument("--cycles", type=int, default=4, metavar="N")
    p = command("run", "execute a trace asynchronously")
    p.add_argument("--trace", type=Path, required=True, metavar="FILE")
    p.add_argument("--latch", metavar="NAME")
    p = command("admits", "check whether a protocol admits a trace")
    p.add_argument("--protocol", choices=PROTOCOLS, required=True)
    p.add_argument("--trace", type=Path, required=True, metavar="FILE")
    p = command("check", "bounded flow-equivalence check")
    p.add_argument("--protocol", choices=PROTOCOLS, required=True)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, metavar="N")
    p.add_argument("--shortest", action="store_true", help="breadth-first: report a shortest violation")
    p = command("refine", "decide whether one protocol's traces are all admitted by another")
    p.add_argument("--from", dest="source", choices=PROTOCOLS, required=True)
    p.add_argument("--to", dest="target", choices=PROTOCOLS, required=True)
    p.add_argument("--depth", type=int, metavar="N", help="also check the target protocol and transfer its verdict")
    p = command("lemmas", "check protocol lemmas over all admitted traces")
    p.add_argument("--protocol", choices=PROTOCOLS, required=True)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, metavar="N")
    p = command("render", "draw a trace's timing diagram, or a protocol graph as DOT")
    p.add_argument("--trace", type=Path, metavar="FILE")
    p.add_argument("--graph", action="store_true")
    p.add_argument("--protocol", choices=PROTOCOLS)
    return parser


def _emit(args, text: str, doc: dict) -> None:
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        print(text.rstrip("\n"))


def _table_text(c, st0, cycles: int) -> str:
    table = sync_table(c, st0, cycles)
    names = [l.name for l in c.latches]
    width = max([len(n) for n in names] + [len(format_value(v)) for row in table for v in row] + [1]) + 2
    lines = ["cycle".ljust(7) + "".join(n.rjust(width) for n in names)]
    for n, row in enumerate(table):
        lines.append(str(n).ljust(7) + "".join(format_value(v).rjust(width) for v in row))
    return "\n".join(lines)


def _table_json(c, st0, cycles: int) -> list[dict]:
    return [
        {l.name: value_to_json(v) for l, v in zip(c.latches, row)}
        for row in sync_table(c, st0, cycles)
    ]


def _read_trace(c, path: Path):
    return parse_trace(c, path.read_text(encoding="utf-8"))


def cmd_validate(args, c, st0) -> int:
    warnings = lint_circuit(c)
    text = (
        f"ok: {len(c.evens)} even, {len(c.odds)} odd latches, {len(c.pairs)} neighbor pairs"
        + "".join(f"\nwarning: {w}" for w in warnings)
    )
    _emit(args, text, {"ok": True, "evens": len(c.evens), "odds": len(c.odds), "pairs": len(c.pairs), "warnings": warnings})
    return 0


def cmd_sync(args, c, st0) -> int:
    if args.cycles < 0:
        raise UsageError("--cycles must be non-negative")
    _emit(args, _table_text(c, st0, args.cycles), {"cycles": _table_json(c, st0, args.cycles)})
    return 0


def cmd_run(args, c, st0) -> int:
    t = _read_trace(c, args.trace)
    latches = c.latches
    if args.latch:
        try:
            latches = (c.latch(args.latch),)
        except KeyError as exc:
            raise UsageError(str(exc)) from None
    try:
        s = run_trace(c, st0, t)
    except EvalError as err:
        _emit(args, f"evaluation failed: {err}", {"error": str(err)})
        return 1
    values = render_values(c, s)
    rows = []
    for l in latches:
        phase = s.phase(l).value
        rows.append({"latch": l.name, "phase": phase, "value": values[l.name],
                     "falls": sum(1 for e in t if e.is_fall and e.latch == l)})
    text = "\n".join(f"{r['latch']}: {r['value']} ({r['phase']}, {r['falls']} falls)" for r in rows)
    _emit(args, text, {"trace": [str(e) for e in t], "latches": rows})
    return 0


def cmd_admits(args, c, st0) -> int:
    t = _read_trace(c, args.trace)
    graph = build_protocol(ProtocolKind(args.protocol), c)
    result = graph.admits(t)
    if isinstance(result, Final):
        marked = [str(p) for p in graph.places if result.marking[p.id]]
        _emit(args, "admitted; marked places: " + ", ".join(marked),
              {"admitted": True, "marked": marked})
        return 0
    _emit(args, f"rejected at index {result.index}: {result.event}",
          {"admitted": False, "index": result.index, "event": str(result.event)})
    return 1


def _verdict_text(c, st0, v) -> str:
    if isinstance(v, Pass):
        return f"PASS: {v.protocol} preserves flow equivalence on all traces up to depth {v.depth} ({v.states} states)"
    if isinstance(v, CyclicTransparencyFinding):
        cyc = " -> ".join(l.name for l in v.cycle)
        return f"CYCLIC TRANSPARENCY under {v.protocol}\n  trace: {' '.join(map(str, v.trace))}\n  cycle: {cyc}"
    lines = [
        f"VIOLATION: {v.protocol} does not preserve flow equivalence",
        f"  trace:    {' '.join(map(str, v.trace))}",
        f"  latch:    {v.latch.name}",
        f"  got:      {format_value(v.got)}",
        f"  expected: {format_value(v.expected)}  (synchronous cycle {v.fall_count} = number of {v.latch.name}- events)",
        "",
        "synchronous execution:",
        _table_text(c, st0, max(v.fall_count, 1)),
    ]
    return "\n".join(lines)


def cmd_check(args, c, st0) -> int:
    if args.depth < 1:
        raise UsageError("--depth must be at least 1")
    v = check_flow_equivalence(c, st0, ProtocolKind(args.protocol), args.depth, shortest=args.shortest)
    doc = v.to_json()
    if isinstance(v, ViolationReport):
        doc["sync"] = _table_json(c, st0, max(v.fall_count, 1))
    _emit(args, _verdict_text(c, st0, v), doc)
    return 0 if isinstance(v, Pass) else 1


def cmd_refine(args, c, st0) -> int:
    src, dst = ProtocolKind(args.source), ProtocolKind(args.target)
    r = check_refinement(build_protocol(src, c), build_protocol(dst, c))
    doc = r.to_json()
    if isinstance(r, Witness):
        text = (
            f"NOT INCLUDED: {src.value} admits a trace {dst.value} rejects\n"
            f"  trace: {' '.join(map(str, r.trace))}\n"
            f"  then:  {r.event} (enabled in {src.value}, disabled in {dst.value})"
        )
        _emit(args, text, doc)
        return 1
    text = f"INCLUDED: every {src.value}-admitted trace is {dst.value}-admitted ({r.pairs} joint markings)"
    if args.depth is not None:
        base = check_flow_equivalence(c, st0, dst, args.depth)
        try:
            note = transfer_flow_equivalence(r, base, src.value)
            text += "\n" + str(note)
            doc["transfer"] = str(note)
        except TransferRefused as exc:
            text += f"\nno transfer: {exc}"
            doc["transfer"] = None
        doc["base"] = base.to_json()
    _emit(args, text, doc)
    return 0


def cmd_lemmas(args, c, st0) -> int:
    report = check_protocol_lemmas(ProtocolKind(args.protocol), c, st0, args.depth)
    lines = [f"{args.protocol} lemmas to depth {args.depth}: {'ok' if report.ok else 'VIOLATED'}"]
    for name, n in sorted(report.checked.items()):
        bad = [v for v in report.violations if v.lemma == name]
        lines.append(f"  {name}: {n} checks, {'FAIL' if bad else 'ok'}")
        for v in bad:
            lines.append(f"    trace: {' '.join(map(str, v.trace))}\n    {v.detail}")
    _emit(args, "\n".join(lines), report.to_json())
    return 0 if report.ok else 1


def cmd_render(args, c, st0) -> int:
    if args.graph == (args.trace is not None):
        raise UsageError("render needs exactly one of --trace FILE or --graph")
    if args.graph:
        if not args.protocol:
            raise UsageError("--graph needs --protocol")
        graph = build_protocol(ProtocolKind(args.protocol), c)
        sys.stdout.write(graph.to_dot(args.protocol))
        return 0
    t = _read_trace(c, args.trace)
    sys.stdout.write(render_waveform(c, st0, t))
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "sync": cmd_sync,
    "run": cmd_run,
    "admits": cmd_admits,
    "check": cmd_check,
    "refine": cmd_refine,
    "lemmas": cmd_lemmas,
    "render": cmd_render,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="warning: %(message)s", level=logging.WARNING, stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        c, st0 = load_circuit(args.circuit.read_bytes())
        return COMMANDS[args.command](args, c, st0)
    except (OSError, CircuitError, TraceSyntaxError, UsageError) as exc:
        print(f"fe: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
