"""Random cell complexes and planted flow sampling for benchmarks.

A benchmark instance is an Erdos-Renyi graph (largest component), a set of
planted 2-cells drawn as tree-plus-closing-edge cycles, and flows that are
random circulations around the planted cells plus i.i.d. Gaussian edge
noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import CellComplex, OrientedGraph, UnionFind, boundary_from_edge_set, tree_cycle
from . import fileio


class GenerationFailed(Exception):
    """Could not realize the requested instance within the retry budget."""


@dataclass(frozen=True)
class SynthConfig:
    node_count: int
    edge_probability: float
    planted_cells: int
    flow_count: int
    cell_std: float = 1.0
    noise_std: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        if not 0 < self.edge_probability <= 1:
            raise ValueError("edge_probability must be in (0, 1]")
        if self.planted_cells < 1:
            raise ValueError("planted_cells must be >= 1")
        if self.flow_count < 1:
            raise ValueError("flow_count must be >= 1")
        if self.cell_std < 0 or self.noise_std < 0:
            raise ValueError("standard deviations must be >= 0")

    def as_mapping(self):
        return {
            "synth.nodes": self.node_count,
            "synth.edge_probability": self.edge_probability,
            "synth.cells": self.planted_cells,
            "synth.flows": self.flow_count,
            "synth.cell_std": self.cell_std,
            "synth.noise_std": self.noise_std,
            "synth.seed": self.seed if self.seed is not None else "",
        }


def _largest_component_graph(node_count, drawn_edges):
    """Build the largest-component OrientedGraph from drawn node pairs,
    relabelling nodes contiguously while preserving edge order."""
    uf = UnionFind(node_count)
    for u, v in drawn_edges:
        uf.union(u, v)
    roots = [uf.find(i) for i in range(node_count)]
    sizes = {}
    for r in roots:
        sizes[r] = sizes.get(r, 0) + 1
    main = max(sizes, key=lambda r: (sizes[r], -r))
    kept_nodes = sorted(i for i in range(node_count) if roots[i] == main)
    relabel = {old: new for new, old in enumerate(kept_nodes)}
    edges = [(relabel[u], relabel[v]) for u, v in drawn_edges if roots[u] == main]
    return OrientedGraph(len(kept_nodes), edges)


def _random_tree_cell(graph, rng):
    """One cell drawn as: random-order greedy spanning tree, uniform non-tree
    edge, closed through the tree."""
    m = graph.edge_count
    order = rng.permutation(m)
    uf = UnionFind(graph.node_count)
    tree = set()
    for e in order:
        u, v = graph.edges[e]
        if uf.union(u, v):
            tree.add(int(e))
    non_tree = [e for e in range(m) if e not in tree]
    closing = non_tree[rng.integers(len(non_tree))]
    return boundary_from_edge_set(graph, tree_cycle(graph, tree, closing))


def random_complex(cfg, rng=None):
    """Sample a random cell complex per the config.

    The Erdos-Renyi draw keeps only the largest connected component (nodes
    relabelled contiguously); the draw is repeated until the component's
    cycle space is large enough to host the planted cells.  Cells are then
    planted one by one, resampling duplicates.  Deterministic given the
    seed.

    Raises
    ------
    GenerationFailed
        After 1000 graph redraws or 1000 duplicate-cell retries.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n, p = cfg.node_count, cfg.edge_probability

    graph = None
    for _ in range(1000):
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        candidate = _largest_component_graph(n, edges)
        independent_cycles = candidate.edge_count - candidate.node_count + 1
        if independent_cycles >= cfg.planted_cells:
            graph = candidate
            break
    if graph is None:
        raise GenerationFailed(
            f"no Erdos-Renyi draw with >= {cfg.planted_cells} independent cycles in 1000 tries")

    cells = []
    seen = set()
    retries = 0
    while len(cells) < cfg.planted_cells:
        cell = _random_tree_cell(graph, rng)
        key = cell.canonical()
        if key in seen:
            retries += 1
            if retries > 1000:
                raise GenerationFailed("planted-cell sampling kept drawing duplicates")
            continue
        seen.add(key)
        cells.append(cell)
    return CellComplex(graph, cells)


def sample_flows(complex_, flow_count, cell_std, noise_std, rng):
    """Planted flows: every column is the boundary matrix times a Gaussian
    cell signal plus Gaussian edge noise.  Deterministic given the rng."""
    if complex_.cell_count < 1:
        raise ValueError("complex must have at least one cell")
    k = complex_.cell_count
    m = complex_.graph.edge_count
    cell_signals = rng.normal(0.0, cell_std, size=(k, flow_count))
    noise = rng.normal(0.0, noise_std, size=(m, flow_count))
    B2 = complex_.boundary_matrix(dtype=np.float64)
    return B2 @ cell_signals + noise


def reference_loss(complex_, flows, solver_cfg=None):
    """Exact loss of the planted (ground-truth) complex on its own flows:
    the benchmark's noise-floor reference."""
    from .hodge import SolverConfig, loss, remove_gradient

    cfg = solver_cfg if solver_cfg is not None else SolverConfig()
    flows0 = remove_gradient(complex_.graph, flows, cfg)
    return loss(complex_, flows0, cfg)


def save_dataset(directory, complex_, flows, cfg=None):
    """Write an instance to ``directory`` in the plain-text dataset formats:
    ``edges.txt``, ``cells.txt``, ``flows.csv``, and a ``meta.txt`` echo of
    the generating config (when given)."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    fileio.write_edge_list(directory / "edges.txt", complex_.graph)
    fileio.write_cells(directory / "cells.txt", complex_.cells)
    fileio.write_flows(directory / "flows.csv", flows)
    meta = cfg.as_mapping() if cfg is not None else {}
    fileio.write_meta(directory / "meta.txt", meta)
    return directory
