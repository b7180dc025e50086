"""Drives the per-relation scans over one parsed trace and merges results.

Each relation runs over the same packed event arrays with fully isolated
state, so the per-relation race sets are directly comparable.  Race records
are per (prior access, current access) pair: when one access races against
several threads, every pair is recorded and the state repair eliminates all
of them going forward.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from . import kernels
from .graph import ConstraintGraph
from .kernels import EDGE_KIND_NAMES
from .trace import BR, RD, WR, BranchDeps, CONSERVATIVE_DEPS, Trace
from .traceio import RaceRecord, KIND_NAMES, static_key_of

ALL_RELATIONS = ("HB", "WCP", "SDP", "DC", "WDP")


@dataclass
class AnalysisResult:
    trace: Trace
    relations: Tuple[str, ...]
    races: List[RaceRecord]
    lamport: np.ndarray
    active: np.ndarray
    pairs: Dict[str, Set[Tuple[int, int]]] = field(default_factory=dict)
    graph: Optional[ConstraintGraph] = None
    clocks: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def analyzed_count(self) -> int:
        return int(self.active.sum())

    def pairs_of(self, relation: str) -> Set[Tuple[int, int]]:
        return self.pairs.get(relation, set())


def fast_path_filter(trace: Trace, deps: BranchDeps = CONSERVATIVE_DEPS) -> np.ndarray:
    """Mask of events the analyses need to look at (1) vs redundant (0)."""
    return kernels.fastpath_scan(
        trace.ops, trace.tids, trace.operands,
        max(trace.nthreads, 1), max(trace.nvars, 1), not deps.precise)


def _dep_arrays(trace: Trace, deps: BranchDeps):
    n = trace.n
    dep_has = np.zeros(n, dtype=np.uint8)
    starts = np.zeros(n + 1, dtype=np.int64)
    reads: List[int] = []
    if deps.precise:
        counts = np.zeros(n, dtype=np.int64)
        for b, rs in sorted(deps.deps.items()):
            dep_has[b] = 1
            counts[b] = len(rs)
        starts[1:] = np.cumsum(counts)
        flat = np.zeros(int(starts[-1]), dtype=np.int64)
        for b, rs in deps.deps.items():
            flat[starts[b]: starts[b] + len(rs)] = sorted(rs)
        return dep_has, starts, flat
    return dep_has, starts, np.zeros(0, dtype=np.int64)


def _pair_dict(trace: Trace, e1s, e2s) -> Set[Tuple[int, int]]:
    return {(int(a), int(b)) for a, b in zip(e1s, e2s) if a >= 0}


def analyze(trace: Trace, deps: BranchDeps = CONSERVATIVE_DEPS,
            relations: Sequence[str] = ALL_RELATIONS,
            fast_path: bool = False,
            build_graph: bool = False,
            collect_clocks: Sequence[str] = ()) -> AnalysisResult:
    """Run the selected relations over one trace and merge their race pairs."""
    relations = tuple(r.upper() for r in relations)
    for r in relations:
        if r not in ALL_RELATIONS:
            raise ValueError(f"unknown relation {r!r}")
    collect_clocks = tuple(r.upper() for r in collect_clocks)

    T = max(trace.nthreads, 1)
    L = max(trace.nlocks, 1)
    V = max(trace.nvars, 1)
    active = fast_path_filter(trace, deps) if fast_path else np.ones(trace.n, dtype=np.uint8)
    first_ev = trace.first_event.astype(np.int64)
    fork_of = trace.fork_of.astype(np.int64)
    args = (trace.ops, trace.tids, trace.operands, T, L, V, active, first_ev, fork_of)

    pairs: Dict[str, Set[Tuple[int, int]]] = {}
    clocks: Dict[str, np.ndarray] = {}

    # HB always runs: it assigns the logical timestamps used for distances.
    e1, e2, _, lamport, clk = kernels.hb_scan(*args, "HB" in collect_clocks)
    if "HB" in relations:
        pairs["HB"] = _pair_dict(trace, e1, e2)
    if "HB" in collect_clocks:
        clocks["HB"] = clk

    if "WCP" in relations or "WCP" in collect_clocks:
        e1, e2, _, clk = kernels.wcp_sdp_scan(*args, False, "WCP" in collect_clocks)
        if "WCP" in relations:
            pairs["WCP"] = _pair_dict(trace, e1, e2)
        if "WCP" in collect_clocks:
            clocks["WCP"] = clk
    if "SDP" in relations or "SDP" in collect_clocks:
        e1, e2, _, clk = kernels.wcp_sdp_scan(*args, True, "SDP" in collect_clocks)
        if "SDP" in relations:
            pairs["SDP"] = _pair_dict(trace, e1, e2)
        if "SDP" in collect_clocks:
            clocks["SDP"] = clk
    if "DC" in relations or "DC" in collect_clocks:
        e1, e2, _, clk = kernels.dc_scan(*args, "DC" in collect_clocks)
        if "DC" in relations:
            pairs["DC"] = _pair_dict(trace, e1, e2)
        if "DC" in collect_clocks:
            clocks["DC"] = clk

    graph = None
    if "WDP" in relations or "WDP" in collect_clocks or build_graph:
        dep_has, dep_start, dep_reads = _dep_arrays(trace, deps)
        e1, e2, _, esrc, edst, ekind, clk = kernels.wdp_scan(
            *args, dep_has, dep_start, dep_reads,
            build_graph, "WDP" in collect_clocks)
        if "WDP" in relations:
            pairs["WDP"] = _pair_dict(trace, e1, e2)
        if "WDP" in collect_clocks:
            clocks["WDP"] = clk
        if build_graph:
            graph = ConstraintGraph(trace.n, (
                (int(s), int(d), EDGE_KIND_NAMES[int(k)])
                for s, d, k in zip(esrc, edst, ekind)))

    races = _merge_races(trace, pairs, lamport, relations)
    return AnalysisResult(trace, relations, races, lamport, active,
                          pairs=pairs, graph=graph, clocks=clocks)


def _merge_races(trace: Trace, pairs: Dict[str, Set[Tuple[int, int]]],
                 lamport: np.ndarray, relations: Sequence[str]) -> List[RaceRecord]:
    merged: Dict[Tuple[int, int], List[str]] = {}
    for rel in relations:
        for p in pairs.get(rel, ()):
            merged.setdefault(p, []).append(rel)
    ts_sorted = np.sort(lamport)
    out = []
    for (a, b) in sorted(merged, key=lambda p: (p[1], p[0])):
        kind = _kind_of(trace, a, b)
        lo, hi = int(lamport[a]), int(lamport[b])
        distance = int(np.searchsorted(ts_sorted, hi, side="left")
                       - np.searchsorted(ts_sorted, lo, side="right"))
        out.append(RaceRecord(
            e1=a, e2=b,
            variable=trace.var_names[trace.operands[a]],
            kind=kind,
            relations=sorted(merged[(a, b)]),
            distance=max(distance, 0),
            static_key=static_key_of(trace, a, b),
        ))
    return out


def _kind_of(trace: Trace, a: int, b: int) -> str:
    if trace.ops[a] == WR and trace.ops[b] == WR:
        return KIND_NAMES[0]
    if trace.ops[a] == WR:
        return KIND_NAMES[1]
    return KIND_NAMES[2]


def replayed_race_pairs(trace: Trace, clocks: np.ndarray,
                        active: Optional[np.ndarray] = None,
                        lockset_filter: bool = True) -> Set[Tuple[int, int]]:
    """Race pairs decided from per-event clocks, at event granularity.

    A pair of conflicting plain accesses races when the later event's clock
    has not absorbed the earlier event's own component (and, for the
    relations that exempt lock-protected conflicts, their locksets are
    disjoint; the condition is vacuous for the relations that order all
    same-lock conflicts).
    """
    n = trace.n
    accesses = [e for e in range(n)
                if trace.is_plain_access(e) and (active is None or active[e])]
    out: Set[Tuple[int, int]] = set()
    for ii, a in enumerate(accesses):
        for b in accesses[ii + 1:]:
            if not trace.conflicting(a, b):
                continue
            if lockset_filter and trace.lockset_mask(a) & trace.lockset_mask(b):
                continue
            u = int(trace.tids[a])
            if clocks[b][u] < clocks[a][u]:
                out.add((a, b))
    return out
