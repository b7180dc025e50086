"""Event-node constraint graph.

Nodes are trace event indices; edges are reordering constraints.  The
analysis produces a frozen base graph; each verification run works on a
private overlay that only records its own added edges, so distinct races
can be checked concurrently over one base.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Set, Tuple

EDGE_KINDS = ("po", "cs", "br", "rule-b", "fork", "race-repair",
              "consec", "lw", "ls")


class ConstraintGraph:
    """Frozen base graph built by the WDP analysis."""

    def __init__(self, n: int, edges: Iterable[Tuple[int, int, str]] = ()):
        self.n = n
        self.succ: List[Set[int]] = [set() for _ in range(n)]
        self.pred: List[Set[int]] = [set() for _ in range(n)]
        self.kinds: Dict[Tuple[int, int], str] = {}
        for s, d, k in edges:
            self._add(int(s), int(d), k)

    def _add(self, s: int, d: int, kind: str):
        if d not in self.succ[s]:
            self.succ[s].add(d)
            self.pred[d].add(s)
            self.kinds[(s, d)] = kind

    def successors(self, e: int) -> Set[int]:
        return self.succ[e]

    def predecessors(self, e: int) -> Set[int]:
        return self.pred[e]

    def has_edge(self, s: int, d: int) -> bool:
        return d in self.succ[s]

    def edge_count(self) -> int:
        return sum(len(s) for s in self.succ)

    def overlay(self) -> "GraphOverlay":
        return GraphOverlay(self)

    def dump(self) -> str:
        lines = []
        for s in range(self.n):
            for d in sorted(self.succ[s]):
                lines.append(f"{s} -> {d} {self.kinds[(s, d)]}")
        return "\n".join(lines) + ("\n" if lines else "")


class GraphOverlay:
    """Copy-on-write view: base edges plus this verification's additions."""

    def __init__(self, base: ConstraintGraph):
        self.base = base
        self.n = base.n
        self.add_succ: Dict[int, Set[int]] = {}
        self.add_pred: Dict[int, Set[int]] = {}
        self._version = 0

    def successors(self, e: int) -> Set[int]:
        extra = self.add_succ.get(e)
        return self.base.succ[e] | extra if extra else self.base.succ[e]

    def predecessors(self, e: int) -> Set[int]:
        extra = self.add_pred.get(e)
        return self.base.pred[e] | extra if extra else self.base.pred[e]

    def has_edge(self, s: int, d: int) -> bool:
        return d in self.base.succ[s] or d in self.add_succ.get(s, ())

    def add_edge(self, s: int, d: int) -> bool:
        """Returns True if the edge is new."""
        if self.has_edge(s, d):
            return False
        self.add_succ.setdefault(s, set()).add(d)
        self.add_pred.setdefault(d, set()).add(s)
        self._version += 1
        return True

    def version(self) -> int:
        return self._version

    # --- reachability (recomputed per saturation round, memoized by caller) --

    def backward_set(self, starts: Iterable[int]) -> Set[int]:
        """All events with a path to any of ``starts`` (excluding trivial self)."""
        seen: Set[int] = set()
        stack = []
        for s in starts:
            for p in self.predecessors(s):
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        while stack:
            e = stack.pop()
            for p in self.predecessors(e):
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def forward_set(self, start: int) -> Set[int]:
        seen: Set[int] = set()
        stack = [start]
        while stack:
            e = stack.pop()
            for s in self.successors(e):
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        return seen

    def cycle_reaching(self, targets: Tuple[int, int]) -> Optional[int]:
        """A node on a cycle that reaches one of ``targets``, or None.

        Only nodes that reach the targets matter, so the search is restricted
        to their backward cone.
        """
        cone = self.backward_set(targets) | set(targets)
        color: Dict[int, int] = {}
        for root in cone:
            if color.get(root, 0):
                continue
            stack: List[Tuple[int, Iterable[int]]] = [(root, iter(self.successors(root)))]
            color[root] = 1
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    if nxt not in cone and nxt not in targets:
                        continue
                    c = color.get(nxt, 0)
                    if c == 1:
                        return nxt
                    if c == 0:
                        color[nxt] = 1
                        stack.append((nxt, iter(self.successors(nxt))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = 2
                    stack.pop()
        return None
