"""Events, traces, well-formedness, and reordering semantics.

A trace is a flat array of events.  Everything downstream shares the same
encoding: per-event op code, thread id, and operand id (variable, lock, or
child thread, depending on the op).  Validation enforces the lock and
fork/join discipline and precomputes the derived tables (matching
acquire/release pairs, last writers, program-order links).

The reordering checker here is deliberately independent of the clock
analyses and the constraint graph: it decides validity of a candidate
reordering straight from the three rules (program order, last writer for
causal reads, lock semantics).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .backend import jit

# Op codes shared with the scan kernels.
RD, WR, ACQ, REL, BR, FORK, JOIN, ARD, AWR, RMW = range(10)

OP_NAMES = {
    RD: "rd", WR: "wr", ACQ: "acq", REL: "rel", BR: "br",
    FORK: "fork", JOIN: "join", ARD: "ard", AWR: "awr", RMW: "rmw",
}
OP_CODES = {v: k for k, v in OP_NAMES.items()}

READ_OPS = (RD, ARD, RMW)        # ops whose value can feed a branch
WRITE_OPS = (WR, AWR, RMW)       # ops that define a variable's last writer
ACCESS_OPS = (RD, WR, ARD, AWR, RMW)
SYNC_OPS = (ACQ, REL, FORK, JOIN, ARD, AWR, RMW)


class WellFormednessError(ValueError):
    """A trace violates the lock or fork/join discipline."""

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"event {index}: {reason}")


@dataclass(frozen=True)
class Event:
    """One trace event.  Identity is the index in the observed trace."""

    index: int
    tid: int
    op: str
    operand: Optional[str]  # variable/lock name, or "T<k>" for fork/join
    loc: str

    def __str__(self):
        if self.operand is None:
            return f"T{self.tid} {self.op}"
        return f"T{self.tid} {self.op} {self.operand}"


@dataclass
class BranchDeps:
    """Which reads a branch may depend on.

    Conservative mode: every branch depends on every earlier read by the
    same thread.  Precise mode: branches listed in ``deps`` depend exactly
    on the listed reads; unlisted branches fall back to conservative.
    """

    precise: bool = False
    deps: Dict[int, FrozenSet[int]] = field(default_factory=dict)

    def depends_on(self, trace: "Trace", branch: int, read: int) -> bool:
        if self.precise and branch in self.deps:
            return read in self.deps[branch]
        return (
            trace.tids[read] == trace.tids[branch]
            and read < branch
            and trace.ops[read] in READ_OPS
        )

    def reads_of(self, trace: "Trace", branch: int) -> List[int]:
        """Reads that ``branch`` depends on, in trace order."""
        if self.precise and branch in self.deps:
            return sorted(self.deps[branch])
        t = trace.tids[branch]
        return [
            e for e in trace.events_of_thread(t)
            if e < branch and trace.ops[e] in READ_OPS
        ]


CONSERVATIVE_DEPS = BranchDeps()


# --- validation scan ------------------------------------------------------
#
# Returns an error code + index instead of raising so the same function can
# run under numba.  Error codes: 0 ok, 1 acquire of held lock, 2 release of
# unheld/mismatched lock, 3 event before fork, 4 duplicate fork,
# 5 self fork/join, 6 event after join, 7 release breaks nesting.

@jit
def _validate_scan(ops, tids, operands, nthreads, nlocks):
    n = ops.shape[0]
    match_release = np.full(n, -1, dtype=np.int64)
    match_acquire = np.full(n, -1, dtype=np.int64)
    innermost = np.full(n, -1, dtype=np.int64)   # innermost enclosing acquire
    last_writer = np.full(n, -1, dtype=np.int64)
    po_prev = np.full(n, -1, dtype=np.int64)
    po_next = np.full(n, -1, dtype=np.int64)
    first_ev = np.full(nthreads, -1, dtype=np.int64)
    last_ev = np.full(nthreads, -1, dtype=np.int64)
    fork_of = np.full(nthreads, -1, dtype=np.int64)
    join_of = np.full(nthreads, -1, dtype=np.int64)

    lock_holder = np.full(nlocks, -1, dtype=np.int64)
    stack_acq = np.zeros((nthreads, nlocks + 1), dtype=np.int64)
    stack_lock = np.zeros((nthreads, nlocks + 1), dtype=np.int64)
    depth = np.zeros(nthreads, dtype=np.int64)
    # last write event per variable (plain or atomic)
    nvars = 0
    for i in range(n):
        if ops[i] == RD or ops[i] == WR or ops[i] == ARD or ops[i] == AWR or ops[i] == RMW:
            if operands[i] + 1 > nvars:
                nvars = operands[i] + 1
    lastw = np.full(nvars, -1, dtype=np.int64)

    for i in range(n):
        t = tids[i]
        op = ops[i]
        if join_of[t] >= 0:
            return 6, i, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of
        if first_ev[t] < 0:
            first_ev[t] = i
        if last_ev[t] >= 0:
            po_prev[i] = last_ev[t]
            po_next[last_ev[t]] = i
        last_ev[t] = i

        if depth[t] > 0:
            innermost[i] = stack_acq[t, depth[t] - 1]

        if op == ACQ:
            # innermost[acq] stays the PARENT acquire; the event itself is
            # recovered as the chain head by enclosing_acquires().
            l = operands[i]
            if lock_holder[l] >= 0:
                return 1, i, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of
            lock_holder[l] = t
            stack_acq[t, depth[t]] = i
            stack_lock[t, depth[t]] = l
            depth[t] += 1
        elif op == REL:
            l = operands[i]
            if lock_holder[l] != t:
                return 2, i, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of
            if depth[t] == 0 or stack_lock[t, depth[t] - 1] != l:
                return 7, i, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of
            a = stack_acq[t, depth[t] - 1]
            depth[t] -= 1
            lock_holder[l] = -1
            match_release[a] = i
            match_acquire[i] = a
            innermost[i] = a  # a release belongs to its own critical section
        elif op == FORK:
            c = operands[i]
            if c == t:
                return 5, i, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of
            if fork_of[c] >= 0:
                return 4, i, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of
            if first_ev[c] >= 0:
                return 3, i, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of
            fork_of[c] = i
        elif op == JOIN:
            c = operands[i]
            if c == t:
                return 5, i, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of
            join_of[c] = i
        elif op == RD or op == ARD:
            last_writer[i] = lastw[operands[i]]
        elif op == WR or op == AWR:
            lastw[operands[i]] = i
        elif op == RMW:
            last_writer[i] = lastw[operands[i]]
            lastw[operands[i]] = i

    return 0, -1, match_release, match_acquire, innermost, last_writer, po_prev, po_next, first_ev, last_ev, fork_of, join_of


_VALIDATE_REASONS = {
    1: "acquire of a lock that is already held",
    2: "release of a lock the thread does not hold",
    3: "fork of a thread that already ran",
    4: "duplicate fork",
    5: "thread forks or joins itself",
    6: "event of a thread after its join",
    7: "release breaks lock nesting",
}


class Trace:
    """A validated execution trace plus its derived tables."""

    def __init__(self, ops, tids, operands, var_names=None, lock_names=None,
                 explicit_locs=None, name: str = "<trace>"):
        self.ops = np.asarray(ops, dtype=np.int8)
        self.tids = np.asarray(tids, dtype=np.int32)
        self.operands = np.asarray(operands, dtype=np.int32)
        self.n = len(self.ops)
        self.nthreads = int(self.tids.max()) + 1 if self.n else 0
        for i in range(self.n):
            if self.ops[i] in (FORK, JOIN):
                self.nthreads = max(self.nthreads, int(self.operands[i]) + 1)
        lock_ids = self.operands[(self.ops == ACQ) | (self.ops == REL)]
        var_mask = np.isin(self.ops, np.array(ACCESS_OPS, dtype=np.int8))
        var_ids = self.operands[var_mask]
        self.nlocks = int(lock_ids.max()) + 1 if len(lock_ids) else 0
        self.nvars = int(var_ids.max()) + 1 if len(var_ids) else 0
        self.var_names = list(var_names) if var_names else [f"v{i}" for i in range(self.nvars)]
        self.lock_names = list(lock_names) if lock_names else [f"m{i}" for i in range(self.nlocks)]
        self.explicit_locs = dict(explicit_locs or {})
        self.name = name
        self._validate()
        self._lockset_cache: Optional[List[int]] = None

    def _validate(self):
        (code, idx, match_release, match_acquire, innermost, last_writer,
         po_prev, po_next, first_ev, last_ev, fork_of, join_of) = _validate_scan(
            self.ops, self.tids, self.operands, max(self.nthreads, 1), max(self.nlocks, 1))
        if code:
            raise WellFormednessError(int(idx), _VALIDATE_REASONS[int(code)])
        self.match_release = match_release
        self.match_acquire = match_acquire
        self.innermost_acq = innermost
        self._last_writer = last_writer
        self.po_prev = po_prev
        self.po_next = po_next
        self.first_event = first_ev
        self.last_event = last_ev
        self.fork_of = fork_of
        self.join_of = join_of
        self._threads_events: Optional[List[List[int]]] = None

    # --- basic views ------------------------------------------------------

    def __len__(self):
        return self.n

    def op_name(self, e: int) -> str:
        return OP_NAMES[int(self.ops[e])]

    def operand_name(self, e: int) -> Optional[str]:
        op = self.ops[e]
        if op in (RD, WR, ARD, AWR, RMW):
            return self.var_names[self.operands[e]]
        if op in (ACQ, REL):
            return self.lock_names[self.operands[e]]
        if op in (FORK, JOIN):
            return f"T{self.operands[e]}"
        return None

    def loc(self, e: int) -> str:
        if e in self.explicit_locs:
            return self.explicit_locs[e]
        operand = self.operand_name(e)
        return self.op_name(e) if operand is None else f"{self.op_name(e)} {operand}"

    def event(self, e: int) -> Event:
        return Event(e, int(self.tids[e]), self.op_name(e), self.operand_name(e), self.loc(e))

    def events_of_thread(self, t: int) -> List[int]:
        if self._threads_events is None:
            per = [[] for _ in range(self.nthreads)]
            for i in range(self.n):
                per[self.tids[i]].append(i)
            self._threads_events = per
        return self._threads_events[t]

    def is_read(self, e: int) -> bool:
        return self.ops[e] in READ_OPS

    def is_write(self, e: int) -> bool:
        return self.ops[e] in WRITE_OPS

    def is_plain_access(self, e: int) -> bool:
        return self.ops[e] in (RD, WR)

    def is_atomic(self, e: int) -> bool:
        return self.ops[e] in (ARD, AWR, RMW)

    def var_of(self, e: int) -> Optional[int]:
        return int(self.operands[e]) if self.ops[e] in ACCESS_OPS else None

    def conflicting(self, a: int, b: int) -> bool:
        """Plain accesses to the same variable by different threads, one a write."""
        if self.tids[a] == self.tids[b]:
            return False
        if not (self.is_plain_access(a) and self.is_plain_access(b)):
            return False
        if self.operands[a] != self.operands[b]:
            return False
        return self.ops[a] == WR or self.ops[b] == WR

    # --- lock structure ---------------------------------------------------

    def enclosing_acquires(self, e: int) -> Tuple[int, ...]:
        """Acquire events of the critical sections containing ``e``, innermost first.

        Acquire and release events count as inside their own critical section.
        """
        out = []
        a = e if self.ops[e] == ACQ else int(self.innermost_acq[e])
        while a >= 0:
            out.append(a)
            a = int(self.innermost_acq[a])  # parent acquire of that acquire
        return tuple(out)

    def lockset_mask(self, e: int) -> int:
        """Bitmask of locks held at ``e`` (for accesses: the protecting locks)."""
        mask = 0
        for a in self.enclosing_acquires(e):
            mask |= 1 << int(self.operands[a])
        return mask

    def locks_held(self, e: int) -> FrozenSet[int]:
        return frozenset(int(self.operands[a]) for a in self.enclosing_acquires(e))

    def cs_pairs(self) -> List[Tuple[int, int]]:
        return [(i, int(self.match_release[i]))
                for i in range(self.n)
                if self.ops[i] == ACQ and self.match_release[i] >= 0]


def last_writer(trace: Trace, read: int) -> Optional[int]:
    """Index of the last same-variable write before ``read``, or None."""
    if not trace.is_read(read):
        raise ValueError(f"event {read} is not a read")
    w = int(trace._last_writer[read])
    return w if w >= 0 else None


def causal_set(trace: Trace, candidate: Iterable[int], deps: BranchDeps) -> Set[int]:
    """Events whose observed value may influence the given event set.

    Closure of three rules over the candidate set: a read feeding a branch in
    the set, a write that is the last writer of a causal read in the set, and
    a read program-ordered before a causal write in the set.
    """
    s = set(int(e) for e in candidate)
    branches = [b for b in s if trace.ops[b] == BR]
    causal: Set[int] = set()

    # seed: reads with a dependent branch in the set
    for b in branches:
        for r in deps.reads_of(trace, b):
            causal.add(r)

    changed = True
    while changed:
        changed = False
        for e in s:
            if e in causal:
                continue
            if trace.is_write(e):
                # last writer of a causal read in the set
                for r in s:
                    if r in causal and trace.is_read(r) and trace._last_writer[r] == e:
                        causal.add(e)
                        changed = True
                        break
            if e not in causal and trace.is_read(e):
                # read program-ordered before a causal write in the set
                t = trace.tids[e]
                for w in s:
                    if w in causal and trace.is_write(w) and trace.tids[w] == t and w > e:
                        causal.add(e)
                        changed = True
                        break
    return causal


def is_causal(trace: Trace, candidate: Iterable[int], e: int, deps: BranchDeps) -> bool:
    """Whether ``e`` is a causal event with respect to the candidate set."""
    s = set(int(x) for x in candidate)
    causal = causal_set(trace, s | {e}, deps)
    return e in causal


@dataclass
class TraceCheck:
    valid: bool
    rule: Optional[str] = None       # "PO" | "LW" | "LS"
    detail: str = ""

    def __bool__(self):
        return self.valid


def check_predictable_trace(trace: Trace, reordered: Sequence[int],
                            deps: BranchDeps = CONSERVATIVE_DEPS) -> TraceCheck:
    """Decide whether a sequence of event indices is a valid reordering.

    Checks the three rules directly against the original trace: per-thread
    prefixes in order (program order, including fork/join ordering), causal
    reads keep their observed last writer, and critical sections on a lock
    never interleave.
    """
    seq = [int(e) for e in reordered]
    present = set(seq)
    if len(present) != len(seq):
        return TraceCheck(False, "PO", "duplicate event in reordering")
    for e in seq:
        if e < 0 or e >= trace.n:
            return TraceCheck(False, "PO", f"event {e} not in trace")

    # Program order: each thread's events form a prefix, in order.
    pos = {e: i for i, e in enumerate(seq)}
    for t in range(trace.nthreads):
        tev = trace.events_of_thread(t)
        k = 0
        for e in tev:
            if e in present:
                if k != tev.index(e):
                    return TraceCheck(False, "PO", f"thread {t} skips event {tev[k]}")
                k += 1
        prev = -1
        for e in tev[:k]:
            if pos[e] < prev:
                return TraceCheck(False, "PO", f"thread {t} events out of order at {e}")
            prev = pos[e]

    # Fork/join ordering (cross-thread program causality).
    for t in range(trace.nthreads):
        f = int(trace.fork_of[t])
        if f >= 0:
            for e in trace.events_of_thread(t):
                if e in present and (f not in present or pos[f] > pos[e]):
                    return TraceCheck(False, "PO", f"thread {t} runs before its fork")
                break  # prefix property: checking the first present event suffices
        j = int(trace.join_of[t])
        if j >= 0 and j in present:
            for e in trace.events_of_thread(t):
                if e not in present or pos[e] > pos[j]:
                    return TraceCheck(False, "PO", f"join of thread {t} before its events")

    # Lock semantics: never acquire a held lock.
    holder: Dict[int, int] = {}
    for e in seq:
        if trace.ops[e] == ACQ:
            l = int(trace.operands[e])
            if l in holder:
                return TraceCheck(False, "LS", f"acquire {e} of held lock {trace.lock_names[l]}")
            holder[l] = int(trace.tids[e])
        elif trace.ops[e] == REL:
            l = int(trace.operands[e])
            if holder.get(l) != int(trace.tids[e]):
                return TraceCheck(False, "LS", f"release {e} of unheld lock")
            del holder[l]

    # Last writer: causal reads must see the same last writer as observed.
    causal = causal_set(trace, present, deps)
    last_in_seq: Dict[int, int] = {}
    for e in seq:
        if trace.is_read(e) and e in causal:
            x = int(trace.operands[e])
            got = last_in_seq.get(x, -1)
            want = int(trace._last_writer[e])
            if got != want:
                return TraceCheck(False, "LW", f"read {e} sees writer {got}, observed {want}")
        if trace.is_write(e):
            last_in_seq[int(trace.operands[e])] = e
    return TraceCheck(True)
