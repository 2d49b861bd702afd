"""Spanning-tree candidate heuristic (SPH) and random-cell baseline.

The SPH variant here builds a maximum-weight spanning tree on the aggregate
absolute harmonic flow, closes candidate cycles through the heaviest
non-tree edges, and greedily adds the single candidate that lowers the
exact loss the most.  It is a faithful-in-spirit reference point, not a
bit-exact port of any particular prior implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import CellComplex, UnionFind, add_cells, boundary_from_edge_set, tree_cycle
from .hodge import SolverConfig, SolverTally, harmonic_projection, loss, make_timer, remove_gradient
from .mfci import InferenceTrace, IterationRecord


@dataclass(frozen=True)
class SphConfig:
    total_cells: int
    candidates_per_iteration: int = 11
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if self.total_cells < 1:
            raise ValueError("total_cells must be >= 1")
        if self.candidates_per_iteration < 1:
            raise ValueError("candidates_per_iteration must be >= 1")


def max_spanning_tree(graph, weights):
    """Greedy maximum-weight spanning forest: edges in decreasing weight
    (ties: lower edge id) joined through union-find.  Returns the forest as
    a set of edge ids; on a connected graph this is a spanning tree."""
    weights = np.asarray(weights, dtype=np.float64)
    m = graph.edge_count
    if weights.shape != (m,):
        raise ValueError("weights length must equal the edge count")
    order = np.lexsort((np.arange(m), -weights))
    uf = UnionFind(graph.node_count)
    tree = set()
    for e in order:
        u, v = graph.edges[e]
        if uf.union(u, v):
            tree.add(int(e))
    return tree


def sph_candidates(complex_, flows_h, count):
    """Spanning-tree candidates from the current harmonic flows.

    Edge weights are the aggregate absolute harmonic flow per edge; each of
    the ``count`` heaviest non-tree edges closes one candidate cycle through
    the max spanning tree.  Every candidate contains exactly one non-tree
    edge and is sign-aligned to the net harmonic flow on that edge.
    """
    flows_h = np.asarray(flows_h, dtype=np.float64)
    if flows_h.ndim == 1:
        flows_h = flows_h[:, None]
    graph = complex_.graph
    weights = np.abs(flows_h).sum(axis=1)
    tree = max_spanning_tree(graph, weights)
    non_tree = np.array([e for e in range(graph.edge_count) if e not in tree], dtype=np.int64)
    if non_tree.size == 0:
        return []
    ranked = non_tree[np.lexsort((non_tree, -weights[non_tree]))]
    candidates = []
    for e in ranked[:count]:
        boundary = boundary_from_edge_set(graph, tree_cycle(graph, tree, int(e)))
        net = flows_h[e].sum()
        if net != 0 and (1 if net > 0 else -1) != boundary.sign_of(int(e)):
            boundary = -boundary
        candidates.append(boundary)
    return candidates


def infer_sph(graph, flows, cfg, rng=None, timer=None):
    """Greedy spanning-tree inference.

    Each iteration recomputes the exact harmonic flows (one solve, except on
    the empty complex where no solve is needed), evaluates every candidate
    by its exact post-addition loss (one solve each), and adds the single
    best cell.  ``rng`` is accepted for interface symmetry; the heuristic
    itself is deterministic.
    """
    del rng
    flows = np.asarray(flows, dtype=np.float64)
    if flows.ndim == 1:
        flows = flows[:, None]
    if timer is None:
        timer = make_timer()

    tally = SolverTally()
    t0 = timer()
    flows0 = remove_gradient(graph, flows, cfg.solver, tally)
    complex_ = CellComplex(graph)
    records = [IterationRecord(0, (), 0, float(np.linalg.norm(flows0)), timer() - t0,
                               tally.calls, tally.iterations)]
    existing = set()
    iteration = 0
    while complex_.cell_count < cfg.total_cells:
        iteration += 1
        current = harmonic_projection(complex_, flows0, cfg.solver, tally)
        candidates = [c for c in sph_candidates(complex_, current, cfg.candidates_per_iteration)
                      if c.canonical() not in existing]
        if not candidates:
            break
        best = None
        best_loss = np.inf
        for cell in candidates:
            trial = CellComplex(graph, complex_.cells + (cell,))
            value = loss(trial, flows0, cfg.solver, tally)
            if value < best_loss:
                best, best_loss = cell, value
        complex_, added, _ = add_cells(complex_, [best])
        existing.add(best.canonical())
        records.append(IterationRecord(iteration, added, complex_.cell_count, best_loss,
                                       timer() - t0, tally.calls, tally.iterations))
    return complex_, InferenceTrace(tuple(records))


def infer_random(graph, flows, total_cells, rng, timer=None):
    """Random baseline: each added cell closes a uniformly chosen non-tree
    edge through a random spanning tree (random edge order, greedy).

    Duplicate draws are resampled up to 100 times; once a cell cannot be
    drawn fresh the run stops short.  The exact loss recorded per iteration
    is reporting only: it is neither counted as a solver call nor timed.
    """
    flows = np.asarray(flows, dtype=np.float64)
    if flows.ndim == 1:
        flows = flows[:, None]
    if timer is None:
        timer = make_timer()
    m = graph.edge_count

    tally = SolverTally()
    t0 = timer()
    excluded = 0.0
    flows0 = remove_gradient(graph, flows, cfg=SolverConfig(), tally=tally)
    complex_ = CellComplex(graph)
    records = [IterationRecord(0, (), 0, float(np.linalg.norm(flows0)), timer() - t0,
                               tally.calls, tally.iterations)]
    existing = set()
    for iteration in range(1, total_cells + 1):
        cell = None
        for _ in range(100):
            order = rng.permutation(m)
            uf = UnionFind(graph.node_count)
            tree = set()
            for e in order:
                u, v = graph.edges[e]
                if uf.union(u, v):
                    tree.add(int(e))
            non_tree = [e for e in range(m) if e not in tree]
            if not non_tree:
                raise ValueError("graph contains no cycle")
            closing = non_tree[rng.integers(len(non_tree))]
            draw = boundary_from_edge_set(graph, tree_cycle(graph, tree, closing))
            if draw.canonical() not in existing:
                cell = draw
                break
        if cell is None:
            break
        complex_, added, _ = add_cells(complex_, [cell])
        existing.add(cell.canonical())
        mark = timer()
        exact_loss = loss(complex_, flows0, SolverConfig())
        excluded += timer() - mark
        records.append(IterationRecord(iteration, added, complex_.cell_count, exact_loss,
                                       timer() - t0 - excluded, tally.calls, tally.iterations))
    return complex_, InferenceTrace(tuple(records))
