"""Vector clocks and FIFO clock queues.

Clocks map thread ids to counters; comparison is pointwise, join is the
pointwise max.  The scan kernels inline these operations on raw arrays for
speed; this module is the reference API used by everything that runs at
desk scale.
"""

from __future__ import annotations

from collections import deque

import numpy as np


class VectorClock:
    """Dense thread->counter map.  Missing components read as 0."""

    __slots__ = ("c",)

    def __init__(self, values=None, nthreads: int = 0):
        if values is None:
            self.c = np.zeros(nthreads, dtype=np.int64)
        else:
            self.c = np.asarray(values, dtype=np.int64).copy()

    def __len__(self):
        return len(self.c)

    def __getitem__(self, t: int) -> int:
        return int(self.c[t]) if t < len(self.c) else 0

    def __eq__(self, other):
        a, b = _aligned(self, other)
        return bool(np.array_equal(a, b))

    def __hash__(self):
        raise TypeError("VectorClock is mutable-sized; not hashable")

    def __repr__(self):
        return f"VectorClock({list(self.c)})"

    def copy(self) -> "VectorClock":
        return VectorClock(self.c)


def _aligned(a: VectorClock, b: VectorClock):
    n = max(len(a.c), len(b.c))
    pa = np.zeros(n, dtype=np.int64)
    pb = np.zeros(n, dtype=np.int64)
    pa[: len(a.c)] = a.c
    pb[: len(b.c)] = b.c
    return pa, pb


def join(a: VectorClock, b: VectorClock) -> VectorClock:
    """Pointwise max of two clocks."""
    pa, pb = _aligned(a, b)
    return VectorClock(np.maximum(pa, pb))


def leq(a: VectorClock, b: VectorClock) -> bool:
    """Pointwise comparison: every component of ``a`` at most that of ``b``."""
    pa, pb = _aligned(a, b)
    return bool(np.all(pa <= pb))


def with_component(c: VectorClock, t: int, v: int) -> VectorClock:
    """Copy of ``c`` with component ``t`` replaced by ``v``.

    Auto-resizes if ``t`` is beyond the current width.
    """
    n = max(len(c.c), t + 1)
    out = np.zeros(n, dtype=np.int64)
    out[: len(c.c)] = c.c
    out[t] = v
    return VectorClock(out)


class ClockQueue:
    """FIFO of vector clocks (optionally tagged with an event id)."""

    def __init__(self):
        self._q = deque()

    def __len__(self):
        return len(self._q)

    def enqueue(self, clock: VectorClock, tag=None):
        self._q.append((clock.copy(), tag))

    def front(self):
        return self._q[0][0]

    def front_tag(self):
        return self._q[0][1]

    def dequeue(self):
        clock, tag = self._q.popleft()
        return clock, tag
