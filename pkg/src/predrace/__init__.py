"""Offline predictive data-race detection.

Replays recorded multithreaded traces, detects candidate races under five
partial orders of increasing weakness (HB, WCP, SDP, DC, WDP), verifies the
weakest detector's candidates by constructing witness reorderings, and ships
a brute-force oracle for ground truth on small traces.
"""

from .trace import (
    Event,
    Trace,
    BranchDeps,
    WellFormednessError,
    last_writer,
    is_causal,
    check_predictable_trace,
)
from .traceio import parse_trace, parse_deps, serialize_trace, RaceRecord, TraceSyntaxError
from .engine import analyze, ALL_RELATIONS
from .vindication import check_wdp_race, Verdict, InternalInvariantError
from .oracle import has_predictable_race, has_predictable_deadlock, enumerate_predictable

__version__ = "0.1.0"

__all__ = [
    "Event",
    "Trace",
    "BranchDeps",
    "WellFormednessError",
    "last_writer",
    "is_causal",
    "check_predictable_trace",
    "parse_trace",
    "parse_deps",
    "serialize_trace",
    "RaceRecord",
    "TraceSyntaxError",
    "analyze",
    "ALL_RELATIONS",
    "check_wdp_race",
    "Verdict",
    "InternalInvariantError",
    "has_predictable_race",
    "has_predictable_deadlock",
    "enumerate_predictable",
]
