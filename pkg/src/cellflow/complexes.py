"""Oriented graphs, 2-cell boundaries, and 2-dimensional cell complexes.

A 2-cell is a polygon glued onto a simple cycle of the graph; its boundary
is a signed edge vector with entries in {0, +1, -1}.  All cell arithmetic
here is exact integer arithmetic; floating point only enters downstream in
the flow computations.
"""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy import sparse


class MissingEdge(Exception):
    """A walk steps between two nodes that are not adjacent."""


class RepeatedNode(Exception):
    """A closed walk revisits an interior node, so it is not a simple cycle."""


class TooShort(Exception):
    """A cycle needs at least three edges."""


class NotACycle(Exception):
    """An edge set does not form a single simple cycle."""


class NoPath(Exception):
    """Two nodes lie in different components of a forest."""


class InvalidCell(Exception):
    """A boundary vector violates the 2-cell invariants for a graph."""


class UnionFind:
    """Disjoint-set forest with path compression and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


class OrientedGraph:
    """Simple undirected graph with an arbitrary but fixed orientation per edge.

    Edge ids are 0-based positions in the edge list and index every matrix
    and flow vector in this package.  Instances are immutable by convention;
    do not mutate ``edges`` after construction.

    Parameters
    ----------
    node_count : int
        Number of nodes; node ids are ``0 .. node_count - 1``.
    edges : sequence of (int, int)
        Ordered ``(source, target)`` pairs.  No self-loops, no duplicate
        edges in either direction.
    """

    def __init__(self, node_count, edges):
        node_count = int(node_count)
        if node_count < 1:
            raise ValueError("node_count must be >= 1")
        edge_list = []
        seen = set()
        for pos, (u, v) in enumerate(edges):
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"edge {pos} is a self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge {pos} = ({u}, {v}) has a node id outside [0, {node_count})")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"edge {pos} = ({u}, {v}) duplicates an earlier edge")
            seen.add(key)
            edge_list.append((u, v))
        self.node_count = node_count
        self.edges = tuple(edge_list)
        self._directed_index = {e: k for k, e in enumerate(edge_list)}
        adjacency = [[] for _ in range(node_count)]
        for k, (u, v) in enumerate(edge_list):
            adjacency[u].append((v, k))
            adjacency[v].append((u, k))
        self.adjacency = tuple(tuple(a) for a in adjacency)
        self._incidence = None

    @property
    def edge_count(self):
        return len(self.edges)

    def edge_sign(self, u, v):
        """Return ``(edge_id, +1)`` if (u, v) is stored source->target,
        ``(edge_id, -1)`` if stored target->source, else raise MissingEdge."""
        k = self._directed_index.get((u, v))
        if k is not None:
            return k, 1
        k = self._directed_index.get((v, u))
        if k is not None:
            return k, -1
        raise MissingEdge(f"no edge between nodes {u} and {v}")

    def incidence(self):
        """Cached signed node-by-edge incidence matrix (see build_incidence)."""
        if self._incidence is None:
            self._incidence = build_incidence(self)
        return self._incidence

    def __repr__(self):
        return f"OrientedGraph(n={self.node_count}, m={self.edge_count})"


def build_incidence(graph):
    """Signed incidence matrix: column k holds +1 at the source and -1 at the
    target of edge k.  Returned as a sparse CSC matrix of int8."""
    m = graph.edge_count
    rows = np.empty(2 * m, dtype=np.int64)
    data = np.empty(2 * m, dtype=np.int8)
    cols = np.repeat(np.arange(m, dtype=np.int64), 2)
    for k, (u, v) in enumerate(graph.edges):
        rows[2 * k] = u
        rows[2 * k + 1] = v
        data[2 * k] = 1
        data[2 * k + 1] = -1
    return sparse.csc_matrix((data, (rows, cols)), shape=(graph.node_count, m))


class CellBoundary:
    """Signed edge vector of one simple cycle: a single column of the
    edge-to-cell boundary matrix.

    Stored sparsely as sorted edge ids plus aligned signs; ``edge_count`` is
    the ambient number of edges, so ``dense()`` is self-contained.
    """

    __slots__ = ("edge_count", "edges", "signs")

    def __init__(self, edge_count, edges, signs):
        edges = np.asarray(edges, dtype=np.int64)
        signs = np.asarray(signs, dtype=np.int8)
        if edges.size == 0:
            raise ValueError("empty boundary")
        if edges.size != signs.size:
            raise ValueError("edges and signs length mismatch")
        order = np.argsort(edges)
        edges = edges[order]
        signs = signs[order]
        if np.any(np.diff(edges) == 0):
            raise ValueError("repeated edge id in boundary")
        if edges[0] < 0 or edges[-1] >= edge_count:
            raise ValueError("edge id outside [0, edge_count)")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +1 or -1")
        self.edge_count = int(edge_count)
        self.edges = edges
        self.signs = signs
        self.edges.setflags(write=False)
        self.signs.setflags(write=False)

    def dense(self, dtype=np.float64):
        b = np.zeros(self.edge_count, dtype=dtype)
        b[self.edges] = self.signs
        return b

    def sign_of(self, edge_id):
        """Sign at an edge, 0 if the edge is not on the boundary."""
        i = np.searchsorted(self.edges, edge_id)
        if i < self.edges.size and self.edges[i] == edge_id:
            return int(self.signs[i])
        return 0

    def canonical(self):
        """Hashable key identifying the boundary up to a global sign flip."""
        flip = -1 if self.signs[0] < 0 else 1
        return (self.edge_count, tuple(self.edges), tuple(flip * self.signs))

    def __neg__(self):
        return CellBoundary(self.edge_count, self.edges, -self.signs)

    def __len__(self):
        return int(self.edges.size)

    def __eq__(self, other):
        if not isinstance(other, CellBoundary):
            return NotImplemented
        return (self.edge_count == other.edge_count
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.signs, other.signs))

    def __hash__(self):
        return hash((self.edge_count, tuple(self.edges), tuple(self.signs)))

    def __repr__(self):
        terms = ", ".join(f"{'+' if s > 0 else '-'}e{e}" for e, s in zip(self.edges, self.signs))
        return f"CellBoundary({terms})"


def check_cell(graph, cell):
    """Raise InvalidCell unless ``cell`` is a valid 2-cell boundary for ``graph``:
    support is a single simple cycle of >= 3 edges and the net flow at every
    node is zero (incidence @ boundary == 0)."""
    if not isinstance(cell, CellBoundary):
        raise InvalidCell(f"expected CellBoundary, got {type(cell).__name__}")
    if cell.edge_count != graph.edge_count:
        raise InvalidCell("boundary length does not match the graph's edge count")
    if len(cell) < 3:
        raise InvalidCell("cycle support has fewer than 3 edges")
    degree = {}
    for e in cell.edges:
        u, v = graph.edges[e]
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    if any(d != 2 for d in degree.values()):
        raise InvalidCell("support is not a simple cycle: some node has degree != 2")
    # degree-2 everywhere means a disjoint union of cycles; connectivity
    # forces a single one (nodes == edges on a cycle).
    if len(degree) != len(cell):
        raise InvalidCell("support is not a single cycle")
    if not _edge_set_connected(graph, cell.edges):
        raise InvalidCell("support is disconnected (several cycles)")
    net = graph.incidence()[:, cell.edges] @ cell.signs.astype(np.int64)
    if np.any(net != 0):
        raise InvalidCell("signs do not cancel at every node (B1 @ b != 0)")


def _edge_set_connected(graph, edge_ids):
    edge_ids = set(int(e) for e in edge_ids)
    start_u, start_v = graph.edges[next(iter(edge_ids))]
    todo = deque([start_u])
    seen_nodes = {start_u}
    seen_edges = set()
    while todo:
        node = todo.popleft()
        for nbr, eid in graph.adjacency[node]:
            if eid in edge_ids and eid not in seen_edges:
                seen_edges.add(eid)
                if nbr not in seen_nodes:
                    seen_nodes.add(nbr)
                    todo.append(nbr)
    return len(seen_edges) == len(edge_ids)


class CellComplex:
    """A graph plus an ordered set of 2-cells.

    The boundary matrix has one column per cell; every constructed complex
    satisfies ``incidence @ boundary == 0`` exactly.  Immutable by
    convention: adding cells returns a new complex (see add_cells).
    """

    def __init__(self, graph, cells=()):
        cells = tuple(cells)
        seen = set()
        for cell in cells:
            check_cell(graph, cell)
            key = cell.canonical()
            if key in seen:
                raise InvalidCell("duplicate cell (up to sign) in cell list")
            seen.add(key)
        self.graph = graph
        self.cells = cells

    @property
    def cell_count(self):
        return len(self.cells)

    def boundary_matrix(self, dtype=np.int8):
        """Edge-by-cell boundary matrix as sparse CSC."""
        m = self.graph.edge_count
        k = len(self.cells)
        if k == 0:
            return sparse.csc_matrix((m, 0), dtype=dtype)
        rows = np.concatenate([c.edges for c in self.cells])
        cols = np.concatenate([np.full(len(c), j, dtype=np.int64) for j, c in enumerate(self.cells)])
        data = np.concatenate([c.signs for c in self.cells]).astype(dtype)
        return sparse.csc_matrix((data, (rows, cols)), shape=(m, k))

    def __repr__(self):
        return f"CellComplex(n={self.graph.node_count}, m={self.graph.edge_count}, k={self.cell_count})"


def validate_cycle(graph, walk):
    """Turn a closed node walk into a 2-cell boundary.

    The walk must start and end at the same node and visit no other node
    twice.  Edges traversed along their stored orientation get +1, against
    it -1.

    Raises
    ------
    TooShort, RepeatedNode, MissingEdge
    """
    walk = [int(x) for x in walk]
    if len(walk) < 2 or walk[0] != walk[-1]:
        raise ValueError("walk must be closed (first node == last node)")
    if len(walk) < 4:
        raise TooShort(f"cycle of length {len(walk) - 1} < 3")
    interior = walk[:-1]
    if len(set(interior)) != len(interior):
        raise RepeatedNode("walk revisits a node before closing")
    edges = []
    signs = []
    for a, b in zip(walk[:-1], walk[1:]):
        k, s = graph.edge_sign(a, b)
        edges.append(k)
        signs.append(s)
    return CellBoundary(graph.edge_count, edges, signs)


def boundary_from_edge_set(graph, edge_ids):
    """Orient an unordered simple-cycle edge set into a boundary vector.

    The traversal starts at the lowest-id node on the cycle and moves first
    toward its lowest-id cycle neighbour, so the output is deterministic.

    Raises
    ------
    NotACycle
        If some node on the support has degree != 2 or the support is
        disconnected.
    """
    edge_ids = sorted(int(e) for e in edge_ids)
    if not edge_ids:
        raise NotACycle("empty edge set")
    neighbours = {}
    for e in edge_ids:
        u, v = graph.edges[e]
        neighbours.setdefault(u, []).append(v)
        neighbours.setdefault(v, []).append(u)
    if any(len(ns) != 2 for ns in neighbours.values()):
        raise NotACycle("some node has degree != 2 in the edge set")
    if len(neighbours) != len(edge_ids):
        raise NotACycle("edge set is not a single cycle")
    start = min(neighbours)
    walk = [start, min(neighbours[start])]
    while walk[-1] != start:
        prev, here = walk[-2], walk[-1]
        a, b = neighbours[here]
        walk.append(b if a == prev else a)
    if len(walk) - 1 != len(edge_ids):
        raise NotACycle("edge set is disconnected (several cycles)")
    return validate_cycle(graph, walk)


def add_cells(complex_, new_cells):
    """Append cells to a complex, dropping duplicates (up to sign) of existing
    or earlier-in-batch cells.

    Returns
    -------
    (CellComplex, added, dropped)
        The new complex plus tuples of the boundaries actually appended and
        those silently dropped as duplicates.

    Raises
    ------
    InvalidCell
        If any new cell fails the 2-cell invariants for the complex's graph.
    """
    seen = {c.canonical() for c in complex_.cells}
    added = []
    dropped = []
    for cell in new_cells:
        check_cell(complex_.graph, cell)
        key = cell.canonical()
        if key in seen:
            dropped.append(cell)
            continue
        seen.add(key)
        added.append(cell)
    out = CellComplex(complex_.graph, complex_.cells + tuple(added))
    return out, tuple(added), tuple(dropped)


def tree_cycle(graph, forest_edges, closing_edge):
    """The unique cycle formed by ``closing_edge`` plus the forest path
    between its endpoints.  Returns the cycle as a set of edge ids.

    ``forest_edges`` must be acyclic; this is not re-checked.

    Raises
    ------
    NoPath
        If the endpoints of ``closing_edge`` lie in different forest
        components.
    """
    forest_edges = set(int(e) for e in forest_edges)
    closing_edge = int(closing_edge)
    if closing_edge in forest_edges:
        raise ValueError("closing_edge must not be part of the forest")
    u, v = graph.edges[closing_edge]
    # BFS from u to v restricted to forest edges; the path is unique.
    parent = {u: (None, None)}
    todo = deque([u])
    while todo:
        node = todo.popleft()
        if node == v:
            break
        for nbr, eid in graph.adjacency[node]:
            if eid in forest_edges and nbr not in parent:
                parent[nbr] = (node, eid)
                todo.append(nbr)
    if v not in parent:
        raise NoPath(f"endpoints {u} and {v} are in different forest components")
    cycle = {closing_edge}
    node = v
    while node != u:
        node, eid = parent[node]
        cycle.add(eid)
    return cycle
