"""Undirected graphs with incidence, Laplacian, and spectral-gap utilities.

Node indices are 1-based in every file and CLI surface (matching common
usage for small hand-labeled networks) and 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DisconnectedGraphError,
    DuplicateLinkError,
    NodeIndexOutOfRangeError,
    SelfLoopError,
)


@dataclass(frozen=True)
class Graph:
    """Undirected graph; links stored 0-based as (i, j) with i < j."""

    n_nodes: int
    links: tuple[tuple[int, int], ...]

    @property
    def n_links(self) -> int:
        return len(self.links)

    def link_labels(self) -> list[tuple[int, int]]:
        """Links as 1-based pairs, in storage order."""
        return [(i + 1, j + 1) for i, j in self.links]


def build_graph(n_nodes: int, links: Iterable[Sequence[int]]) -> Graph:
    """Validate 1-based node pairs and return a `Graph`.

    Raises SelfLoopError, DuplicateLinkError, or NodeIndexOutOfRangeError
    on bad input. Link order is preserved (it fixes incidence columns and
    weight-vector layout).
    """
    if n_nodes < 1:
        raise NodeIndexOutOfRangeError(f"need at least one node, got {n_nodes}")
    normalized: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for pair in links:
        i, j = int(pair[0]), int(pair[1])
        if not (1 <= i <= n_nodes and 1 <= j <= n_nodes):
            raise NodeIndexOutOfRangeError(
                f"link ({i},{j}) outside node range 1..{n_nodes}"
            )
        if i == j:
            raise SelfLoopError(f"link ({i},{j}) is a self-loop")
        key = (min(i, j) - 1, max(i, j) - 1)
        if key in seen:
            raise DuplicateLinkError(f"link ({i},{j}) appears more than once")
        seen.add(key)
        normalized.append(key)
    return Graph(n_nodes=n_nodes, links=tuple(normalized))


def adjacency(g: Graph) -> np.ndarray:
    A = np.zeros((g.n_nodes, g.n_nodes))
    for i, j in g.links:
        A[i, j] = 1.0
        A[j, i] = 1.0
    return A


def degrees(g: Graph) -> np.ndarray:
    d = np.zeros(g.n_nodes)
    for i, j in g.links:
        d[i] += 1.0
        d[j] += 1.0
    return d


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability from node 0."""
    if g.n_nodes == 1:
        return True
    nbrs: list[list[int]] = [[] for _ in range(g.n_nodes)]
    for i, j in g.links:
        nbrs[i].append(j)
        nbrs[j].append(i)
    seen = [False] * g.n_nodes
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for v in nbrs[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count == g.n_nodes


def incidence(g: Graph, orientation: Sequence[int] | None = None) -> np.ndarray:
    """Oriented incidence matrix E (N x M), one +1 head and one -1 tail
    per column.

    Default orientation makes the smaller node index the head of each
    link. `orientation` optionally flips individual links: entry +1 keeps
    the default head, -1 swaps head and tail.
    """
    E = np.zeros((g.n_nodes, g.n_links))
    for idx, (i, j) in enumerate(g.links):
        sign = 1.0
        if orientation is not None:
            sign = float(np.sign(orientation[idx])) or 1.0
        E[i, idx] = sign
        E[j, idx] = -sign
    return E


def laplacian(g: Graph) -> np.ndarray:
    """Graph Laplacian E E^T (equals degree matrix minus adjacency)."""
    E = incidence(g)
    return E @ E.T


def lambda2(g: Graph) -> float:
    """Algebraic connectivity: second-smallest Laplacian eigenvalue.

    Returns exactly 0.0 for disconnected graphs so the connectivity
    equivalence is not blurred by eigensolver rounding.
    """
    if g.n_nodes < 2:
        raise ValueError("lambda2 needs at least 2 nodes")
    if not is_connected(g):
        return 0.0
    return float(np.linalg.eigvalsh(laplacian(g))[1])


def coupling_bound(g: Graph, theta: float) -> float:
    """Coupling threshold k* = theta / (2 lambda2).

    Above this value the decay rate 2 k lambda2 - theta is positive.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if not is_connected(g):
        raise DisconnectedGraphError("coupling bound requires a connected graph")
    return theta / (2.0 * lambda2(g))


def path_graph(n_nodes: int) -> Graph:
    return build_graph(n_nodes, [(i, i + 1) for i in range(1, n_nodes)])


def barbell_graph() -> Graph:
    """Eight-node barbell: two 4-cliques {1..4}, {5..8} bridged by (4,5).

    The bridge is the last link, so it occupies the final weight column.
    """
    links = []
    for a in range(1, 5):
        for b in range(a + 1, 5):
            links.append((a, b))
    for a in range(5, 9):
        for b in range(a + 1, 9):
            links.append((a, b))
    links.append((4, 5))
    return build_graph(8, links)
