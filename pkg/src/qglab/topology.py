"""Graph construction and directed-bond bookkeeping.

A graph with B undirected bonds induces 2B directed bonds.  Directed bond
``mu = 2*b + d`` traverses edge ``b`` forward (``d = 0``, from the lower to
the higher endpoint as stored) or backward (``d = 1``); ``mu ^ 1`` is the
reversal.  This fixed layout keeps the reversal O(1) and every assembled
matrix reproducible.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import GraphConstructionError

REGULAR_ATTEMPT_BUDGET = 1000


@dataclass(frozen=True)
class Graph:
    """Simple connected undirected graph.

    ``edges[b]`` is the vertex pair of bond ``b`` with ``u < v``;
    ``adjacency[v]`` lists the incident bond ids of vertex ``v`` in
    ascending order (the local ordering used by scattering assembly).
    """

    vertex_count: int
    edges: tuple
    adjacency: tuple

    @property
    def bond_count(self) -> int:
        return len(self.edges)

    def degree(self, vertex: int) -> int:
        return len(self.adjacency[vertex])


@dataclass(frozen=True)
class DirectedBonds:
    """Index maps for the 2B directed bonds of a graph."""

    size: int
    origin: np.ndarray
    terminus: np.ndarray

    @staticmethod
    def flip(mu):
        """Reversal of a directed bond; an involution without fixed points."""
        return mu ^ 1

    @staticmethod
    def index(bond: int, direction: int) -> int:
        return 2 * bond + direction

    @staticmethod
    def bond_of(mu: int) -> int:
        return mu >> 1


def directed_bonds(graph: Graph) -> DirectedBonds:
    """Directed-bond index maps of ``graph``."""
    two_b = 2 * graph.bond_count
    origin = np.empty(two_b, dtype=np.int64)
    terminus = np.empty(two_b, dtype=np.int64)
    for b, (u, v) in enumerate(graph.edges):
        origin[2 * b] = u
        terminus[2 * b] = v
        origin[2 * b + 1] = v
        terminus[2 * b + 1] = u
    return DirectedBonds(size=two_b, origin=origin, terminus=terminus)


def _finalize(vertex_count: int, edges) -> Graph:
    edges = tuple(tuple(sorted(e)) for e in edges)
    if len(set(edges)) != len(edges):
        raise ValueError("duplicate edges")
    for u, v in edges:
        if u == v:
            raise ValueError("self-loop")
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise ValueError("edge endpoint out of range")
    adjacency = [[] for _ in range(vertex_count)]
    for b, (u, v) in enumerate(edges):
        adjacency[u].append(b)
        adjacency[v].append(b)
    if any(not a for a in adjacency):
        raise ValueError("isolated vertex")
    graph = Graph(
        vertex_count=vertex_count,
        edges=edges,
        adjacency=tuple(tuple(sorted(a)) for a in adjacency),
    )
    if not is_connected(graph):
        raise ValueError("graph is not connected")
    return graph


def is_connected(graph: Graph) -> bool:
    """Breadth-first reachability check from vertex 0."""
    if graph.vertex_count == 0:
        return False
    seen = [False] * graph.vertex_count
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        v = queue.popleft()
        for b in graph.adjacency[v]:
            u, w = graph.edges[b]
            other = w if u == v else u
            if not seen[other]:
                seen[other] = True
                count += 1
                queue.append(other)
    return count == graph.vertex_count


def build_complete_graph(vertex_count: int) -> Graph:
    """Complete graph K_V with B = V(V-1)/2 bonds."""
    if vertex_count < 2:
        raise ValueError("complete graph needs at least 2 vertices")
    edges = [(u, v) for u in range(vertex_count) for v in range(u + 1, vertex_count)]
    return _finalize(vertex_count, edges)


def build_random_regular(vertex_count: int, degree: int, seed: int) -> Graph:
    """Random degree-regular simple connected graph via the pairing model.

    Rejected pairings (multi-edge, self-loop, disconnected) are redrawn up
    to ``REGULAR_ATTEMPT_BUDGET`` times; deterministic for a given seed.
    """
    if vertex_count * degree % 2 != 0:
        raise ValueError("vertex_count * degree must be even")
    if degree < 1 or degree >= vertex_count:
        raise ValueError("need 1 <= degree < vertex_count")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(vertex_count), degree)
    for _ in range(REGULAR_ATTEMPT_BUDGET):
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        edges = {tuple(sorted(p)) for p in pairs.tolist()}
        if len(edges) != pairs.shape[0]:
            continue
        try:
            return _finalize(vertex_count, sorted(edges))
        except ValueError:
            continue
    raise GraphConstructionError(
        f"no simple connected {degree}-regular graph on {vertex_count} vertices "
        f"found in {REGULAR_ATTEMPT_BUDGET} pairing attempts"
    )


def sample_bond_lengths(bond_count: int, interval=(1.0, 2.0), seed: int = 0) -> np.ndarray:
    """Independent uniform bond lengths in ``interval``; deterministic per seed."""
    low, high = float(interval[0]), float(interval[1])
    if not (0.0 < low < high):
        raise ValueError("need 0 < low < high for the length interval")
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=bond_count)


def mean_spacing(lengths: np.ndarray) -> float:
    """Mean level spacing pi / sum(L_b) of the graph spectrum."""
    return float(np.pi / np.sum(lengths))
