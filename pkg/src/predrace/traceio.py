"""Text trace format, branch-dependence sidecar, and the JSON race report.

Trace grammar, one event per line::

    T<k> acq <lock> | T<k> rel <lock> | T<k> rd <var> | T<k> wr <var>
    T<k> br | T<k> fork T<j> | T<k> join T<j>
    T<k> ard <var> | T<k> awr <var> | T<k> rmw <var>

with an optional trailing ``@<loc>`` source tag.  ``#`` starts a comment,
blank lines are ignored.  Event indices are the 0-based order of event
lines.  Thread ids are assigned densely in first-appearance order.

Deps sidecar, one branch per line::

    br <branch-index>: <read-index>[,<read-index>...]

Branches absent from the sidecar fall back to the conservative assumption
(dependent on all prior same-thread reads).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .trace import (
    ACQ, ARD, AWR, BR, FORK, JOIN, OP_CODES, RD, REL, RMW, WR,
    BranchDeps, Trace, READ_OPS,
)


class TraceSyntaxError(ValueError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class BadIndexError(ValueError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


_TID_RE = re.compile(r"^T(\d+)$")

_LOCK_OPS = {"acq", "rel"}
_VAR_OPS = {"rd", "wr", "ard", "awr", "rmw"}
_THREAD_OPS = {"fork", "join"}


def parse_trace(text: str, name: str = "<trace>") -> Trace:
    """Parse trace text into a validated Trace."""
    ops: List[int] = []
    tids: List[int] = []
    operands: List[int] = []
    locs: Dict[int, str] = {}
    tid_ids: Dict[str, int] = {}
    var_ids: Dict[str, int] = {}
    lock_ids: Dict[str, int] = {}
    var_names: List[str] = []
    lock_names: List[str] = []

    def tid_of(tok: str, line_no: int) -> int:
        m = _TID_RE.match(tok)
        if not m:
            raise TraceSyntaxError(line_no, f"expected thread id like T0, got {tok!r}")
        if tok not in tid_ids:
            tid_ids[tok] = len(tid_ids)
        return tid_ids[tok]

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        loc = None
        if "@" in line:
            line, loc = line.split("@", 1)
            line = line.strip()
            loc = loc.strip()
            if not loc:
                raise TraceSyntaxError(line_no, "empty location tag")
        parts = line.split()
        if len(parts) < 2:
            raise TraceSyntaxError(line_no, f"malformed event: {raw.strip()!r}")
        tid = tid_of(parts[0], line_no)
        op = parts[1]
        if op not in OP_CODES:
            raise TraceSyntaxError(line_no, f"unknown operation {op!r}")
        if op == "br":
            if len(parts) != 2:
                raise TraceSyntaxError(line_no, "br takes no operand")
            operand = 0
        else:
            if len(parts) != 3:
                raise TraceSyntaxError(line_no, f"{op} takes exactly one operand")
            tok = parts[2]
            if op in _THREAD_OPS:
                operand = tid_of(tok, line_no)
            elif op in _LOCK_OPS:
                if tok not in lock_ids:
                    lock_ids[tok] = len(lock_ids)
                    lock_names.append(tok)
                operand = lock_ids[tok]
            else:
                if tok not in var_ids:
                    var_ids[tok] = len(var_ids)
                    var_names.append(tok)
                operand = var_ids[tok]
        if loc is not None:
            locs[len(ops)] = loc
        ops.append(OP_CODES[op])
        tids.append(tid)
        operands.append(operand)

    return Trace(ops, tids, operands, var_names, lock_names, locs, name=name)


def serialize_trace(trace: Trace, indices: Optional[Sequence[int]] = None) -> str:
    """Render a trace (or a subsequence of its events) back to text."""
    which = range(trace.n) if indices is None else indices
    lines = []
    for e in which:
        ev = trace.event(int(e))
        line = str(ev)
        if int(e) in trace.explicit_locs:
            line += f" @{trace.explicit_locs[int(e)]}"
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


_DEPS_RE = re.compile(r"^br\s+(\d+)\s*:\s*(.*)$")


def parse_deps(text: str, trace: Trace) -> BranchDeps:
    """Parse a branch-dependence sidecar against a parsed trace."""
    deps: Dict[int, frozenset] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DEPS_RE.match(line)
        if not m:
            raise TraceSyntaxError(line_no, f"malformed deps line: {raw.strip()!r}")
        b = int(m.group(1))
        if b >= trace.n or trace.ops[b] != BR:
            raise BadIndexError(line_no, f"event {b} is not a branch")
        reads = []
        rest = m.group(2).strip()
        if rest:
            for tok in rest.split(","):
                r = int(tok.strip())
                if r >= trace.n or trace.ops[r] not in READ_OPS:
                    raise BadIndexError(line_no, f"event {r} is not a read")
                if trace.tids[r] != trace.tids[b] or r >= b:
                    raise BadIndexError(
                        line_no, f"read {r} is not program-ordered before branch {b}")
                reads.append(r)
        deps[b] = frozenset(reads)
    return BranchDeps(precise=True, deps=deps)


# --- race records and reports ----------------------------------------------

KIND_NAMES = {0: "wr-wr", 1: "wr-rd", 2: "rd-wr"}


@dataclass
class RaceRecord:
    """One detected race pair, tagged with every relation that flagged it."""

    e1: int
    e2: int
    variable: str
    kind: str                      # wr-wr | wr-rd | rd-wr
    relations: List[str] = field(default_factory=list)
    distance: int = 0
    static_key: Tuple[str, str] = ("", "")
    vindication: Optional[str] = None   # None | verified | no-race | unknown
    witness: Optional[List[int]] = None
    witness_file: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "e1": self.e1,
            "e2": self.e2,
            "variable": self.variable,
            "kind": self.kind,
            "relations": sorted(self.relations),
            "distance": self.distance,
            "static_key": list(self.static_key),
            "vindication": self.vindication,
        }
        if self.witness is not None:
            d["witness"] = list(self.witness)
        if self.witness_file is not None:
            d["witness_file"] = self.witness_file
        return d


def static_key_of(trace: Trace, e1: int, e2: int) -> Tuple[str, str]:
    """Unordered pair of source tags; loop instances of one site collapse."""
    a, b = trace.loc(e1), trace.loc(e2)
    return (a, b) if a <= b else (b, a)


def relation_stats(races: Sequence[RaceRecord], relations: Sequence[str]) -> dict:
    stats = {}
    for rel in relations:
        tagged = [r for r in races if rel in r.relations]
        stats[rel] = {
            "dynamic": len(tagged),
            "static": len({r.static_key for r in tagged}),
        }
    return stats


def emit_report(trace_name: str, event_count: int, analyzed_count: int,
                races: Sequence[RaceRecord], relations: Sequence[str],
                fmt: str = "json") -> str:
    """Produce the race report in JSON or plain text."""
    stats = relation_stats(races, relations)
    if fmt == "json":
        doc = {
            "trace": trace_name,
            "event_count": event_count,
            "analyzed_count": analyzed_count,
            "races": [r.to_dict() for r in races],
            "stats": stats,
        }
        return json.dumps(doc, indent=2) + "\n"

    lines = [f"trace: {trace_name}",
             f"events: {event_count} (analyzed {analyzed_count})"]
    for rel in relations:
        s = stats[rel]
        lines.append(f"{rel}: {s['static']} static, {s['dynamic']} dynamic")
    for r in races:
        extra = f" [{r.vindication}]" if r.vindication else ""
        lines.append(
            f"race {r.kind} on {r.variable}: events ({r.e1}, {r.e2}) "
            f"relations={{{','.join(sorted(r.relations))}}} distance={r.distance}{extra}")
    return "\n".join(lines) + "\n"
