"""Directed graphs on agents ``1..N``: reachability, pair coverage, halving reduction."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DomainError


@dataclass(frozen=True)
class DirectedGraph:
    """Simple directed graph; ``(j, k)`` in ``arrows`` means an arrow ``j -> k``."""

    n_nodes: int
    arrows: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.n_nodes < 1:
            raise DomainError("a graph needs at least one node")
        arrows = frozenset((int(j), int(k)) for j, k in self.arrows)
        for j, k in arrows:
            if j == k:
                raise DomainError(f"self-loop {j}->{k} not allowed")
            if not (1 <= j <= self.n_nodes and 1 <= k <= self.n_nodes):
                raise DomainError(f"arrow {j}->{k} outside nodes 1..{self.n_nodes}")
        object.__setattr__(self, "arrows", arrows)

    @classmethod
    def from_codes(cls, n_nodes: int, codes: Iterable[str | int]) -> "DirectedGraph":
        """Build from two-digit codes such as ``{"21", "34"}`` (nodes ``<= 9``)."""
        arrows = []
        for code in codes:
            s = str(code)
            if len(s) != 2:
                raise DomainError(f"arrow code {code!r} must have two digits")
            arrows.append((int(s[0]), int(s[1])))
        return cls(n_nodes, frozenset(arrows))

    @property
    def nodes(self) -> range:
        return range(1, self.n_nodes + 1)

    def with_arrows(self, extra: Iterable[tuple[int, int]]) -> "DirectedGraph":
        return DirectedGraph(self.n_nodes, self.arrows | frozenset(extra))

    def successors(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for j, k in sorted(self.arrows):
            adj[j].append(k)
        return adj

    def predecessors(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for j, k in sorted(self.arrows):
            adj[k].append(j)
        return adj

    def sorted_arrows(self) -> list[tuple[int, int]]:
        return sorted(self.arrows)

    def to_edge_list(self) -> str:
        return "".join(f"{j} -> {k}\n" for j, k in self.sorted_arrows())

    @classmethod
    def from_edge_list(cls, n_nodes: int, text: str) -> "DirectedGraph":
        arrows = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                a, b = line.split("->")
                arrows.append((int(a), int(b)))
            except ValueError:
                raise DomainError(f"cannot parse edge line {line!r}") from None
        return cls(n_nodes, frozenset(arrows))


def _bfs(adj: Mapping[int, list[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def globally_reachable_nodes(g: DirectedGraph) -> set[int]:
    """Nodes reachable by a directed path from every node.

    A node qualifies when a breadth-first search over reversed arrows starting
    from it visits all nodes.
    """
    pred = g.predecessors()
    return {v for v in g.nodes if len(_bfs(pred, v)) == g.n_nodes}


def pairwise_coverage(g: DirectedGraph) -> bool:
    """True when every unordered pair of distinct nodes is joined by an arrow in some direction."""
    und = {frozenset(a) for a in g.arrows}
    n = g.n_nodes
    return all(frozenset((j, k)) in und for j in range(1, n + 1) for k in range(j + 1, n + 1))


def uncovered_pairs(g: DirectedGraph) -> list[tuple[int, int]]:
    und = {frozenset(a) for a in g.arrows}
    n = g.n_nodes
    return [(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1)
            if frozenset((j, k)) not in und]


class SelectorOracle(dict):
    """Mapping from unordered pairs ``(i, j)`` with ``i < j`` to a common target ``k_ij``."""

    def __getitem__(self, pair):
        i, j = pair
        return super().__getitem__((min(i, j), max(i, j)))

    def induced_graph(self, n_nodes: int) -> DirectedGraph:
        arrows = set()
        for (i, j), k in self.items():
            arrows.update((a, k) for a in (i, j) if a != k)
        return DirectedGraph(n_nodes, frozenset(arrows))


def gamma_step(A: list[int], oracle: Mapping, n_nodes: int) -> list[int]:
    """One halving pass: pair consecutive elements, map each pair to its selector."""
    out = []
    for idx in range(0, len(A) - 1, 2):
        i, j = A[idx], A[idx + 1]
        k = oracle[(min(i, j), max(i, j))]
        if not (1 <= k <= n_nodes):
            raise DomainError(f"selector k[{i},{j}]={k} outside 1..{n_nodes}")
        out.append(int(k))
    if len(A) % 2:
        out.append(A[-1])
    return sorted(set(out))


def gamma_reduce(n_nodes: int, oracle: Mapping, return_trace: bool = False):
    """Collapse ``{1..N}`` to one node by repeated halving through ``oracle``.

    Elements are paired in ascending order and an odd leftover passes through
    unchanged.  The surviving node is globally reachable in the graph with
    arrows ``i -> k_ij`` and ``j -> k_ij``.
    """
    if n_nodes < 1:
        raise DomainError("n_nodes must be positive")
    A = list(range(1, n_nodes + 1))
    trace = [A]
    while len(A) > 1:
        A = gamma_step(A, oracle, n_nodes)
        trace.append(A)
    if return_trace:
        return A[0], trace
    return A[0]


def gamma_iteration_bound(n_nodes: int) -> int:
    return math.ceil(math.log2(n_nodes)) if n_nodes > 1 else 0
