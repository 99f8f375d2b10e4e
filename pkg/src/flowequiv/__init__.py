"""Bounded flow-equivalence checking for desynchronized latch-based circuits."""

from .asyncexec import AsyncState, CyclicTransparency, EvalError, async_eval, current_value, run_trace, step
from .flow import (
    CyclicTransparencyFinding,
    Included,
    Pass,
    ViolationReport,
    Witness,
    check_flow_equivalence,
    check_refinement,
    transfer_flow_equivalence,
)
from .lemmas import check_fd_lemmas, check_rd_lemmas
from .markedgraph import Final, MarkedGraph, RejectedAt
from .model import (
    Circuit,
    Event,
    Fall,
    Latch,
    Rise,
    Transparency,
    X,
    left_neighbors,
    num_events,
    right_neighbors,
    transparency,
)
from .netlist import load_circuit, parse_expr, parse_trace
from .protocols import ProtocolKind, build_protocol
from .sync import sync_eval, sync_table

__version__ = "0.1.0"
