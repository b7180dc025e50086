"""Random well-formed trace generation.

``generate`` produces small fuzzing traces (never reentrant acquires,
critical sections balanced by closing releases at the end).  ``bench_trace``
builds large synthetic workloads directly as packed arrays for the scaling
benchmark; its accesses are lock-protected or thread-local so the workload
is race-free and timing is not distorted by race bookkeeping.
"""

from __future__ import annotations

import random

import numpy as np

from .backend import jit
from .trace import ACQ, ARD, AWR, BR, RD, REL, RMW, WR, Trace


def generate(threads: int = 3, events: int = 12, locks: int = 2, variables: int = 3,
             branch_rate: float = 0.15, atomic_rate: float = 0.0, seed: int = 0) -> str:
    """Deterministic random trace text; same seed, same bytes."""
    rng = random.Random(seed)
    held = [[] for _ in range(threads)]
    free = [True] * locks
    lines = []

    def open_count():
        return sum(len(s) for s in held)

    while len(lines) + open_count() < events:
        t = rng.randrange(threads)
        ops = ["rd", "rd", "rd", "wr", "wr", "wr"]
        if locks and any(free) and len(held[t]) < locks:
            ops += ["acq", "acq"]
        if held[t]:
            ops += ["rel", "rel"]
        if rng.random() < branch_rate:
            ops.append("br")
        if atomic_rate and rng.random() < atomic_rate:
            ops += ["ard", "awr", "rmw"]
        op = rng.choice(ops)
        if op == "acq":
            l = rng.choice([i for i in range(locks) if free[i]])
            free[l] = False
            held[t].append(l)
            lines.append(f"T{t} acq m{l}")
        elif op == "rel":
            l = held[t].pop()  # locks are well nested per thread
            free[l] = True
            lines.append(f"T{t} rel m{l}")
        elif op == "br":
            lines.append(f"T{t} br")
        elif op in ("rd", "wr"):
            v = rng.randrange(variables)
            lines.append(f"T{t} {op} v{v}")
        else:  # atomic ops live on their own variables
            v = rng.randrange(variables)
            lines.append(f"T{t} {op} av{v}")
    for t in range(threads):
        while held[t]:
            l = held[t].pop()
            free[l] = True
            lines.append(f"T{t} rel m{l}")
    return "\n".join(lines) + "\n"


@jit
def _bench_fill(ops, tids, operands, threads, locks, variables, seed):
    n = ops.shape[0]
    state = np.int64(seed * 2654435761 + 1)
    i = 0
    block = 0
    shared = locks  # vars [0, locks) are lock-protected, one per lock
    while i < n:
        t = block % threads
        l = block % locks
        state = state * np.int64(6364136223846793005) + np.int64(1442695040888963407)
        local = shared + (t % max(variables - shared, 1))
        if i + 8 > n:
            ops[i] = RD
            tids[i] = t
            operands[i] = local
            i += 1
            continue
        # var l is only ever touched under lock l; var `local` is thread-private
        ops[i] = ACQ; tids[i] = t; operands[i] = l; i += 1
        ops[i] = RD; tids[i] = t; operands[i] = l; i += 1
        ops[i] = WR; tids[i] = t; operands[i] = l; i += 1
        ops[i] = REL; tids[i] = t; operands[i] = l; i += 1
        ops[i] = RD; tids[i] = t; operands[i] = local; i += 1
        ops[i] = WR; tids[i] = t; operands[i] = local; i += 1
        ops[i] = RD; tids[i] = t; operands[i] = local; i += 1
        ops[i] = BR; tids[i] = t; operands[i] = 0; i += 1
        block += 1
    return ops, tids, operands


def bench_trace(n: int, threads: int = 8, locks: int = 4, variables: int = 16,
                seed: int = 7) -> Trace:
    """Large synthetic trace as packed arrays (skips the text round trip)."""
    assert variables > locks + threads, "need thread-local variables"
    ops = np.zeros(n, dtype=np.int8)
    tids = np.zeros(n, dtype=np.int32)
    operands = np.zeros(n, dtype=np.int32)
    _bench_fill(ops, tids, operands, threads, locks, variables, seed)
    return Trace(ops, tids, operands, name=f"bench-{n}")
