"""Matrix-factorization cell inference (MFCI).

Each iteration factors the current harmonic flows at low rank, discretizes
the best factor columns into simple cycles, optionally evaluates the
candidate cells by their exact post-addition loss, adds the winners, and
updates the harmonic flows either exactly (one iterative solve) or by the
cheap span-projection approximation (no iterative solve at all).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .complexes import (
    CellComplex,
    UnionFind,
    add_cells,
    boundary_from_edge_set,
    tree_cycle,
    validate_cycle,
)
from .factorize import (
    DegenerateInput,
    IcaConfig,
    column_scores,
    fast_ica,
    select_columns,
    truncated_svd,
)
from .hodge import (
    SolverConfig,
    SolverTally,
    approx_harmonic_update,
    harmonic_projection,
    loss,
    make_timer,
    remove_gradient,
)


class GraphIsForest(Exception):
    """The graph contains no cycle, so no 2-cell can exist."""


class WalkFailed(Exception):
    """Every random-walk restart dead-ended before closing a cycle."""


_METHODS = ("svd", "ica")
_DISCRETIZATIONS = ("deterministic", "random_walk")
_PROJECTIONS = ("exact", "approximate")


@dataclass(frozen=True)
class InferenceConfig:
    """Knobs of the inference loop.

    ``candidates_per_iteration`` (l) factor columns are discretized each
    iteration and ``added_per_iteration`` (l') of them are kept, so the
    "best 1 of 8" setup is l=8, l'=1 with evaluation, and the fast "all 8,
    no evaluation" setup is l=l'=8.  ``evaluate_candidates`` of None
    resolves to ``l' < l``; disabling evaluation demands l' == l.
    ``factorization_rank`` of None means rank = l.
    """

    total_cells: int
    candidates_per_iteration: int = 1
    added_per_iteration: int = 1
    factorization_rank: int | None = None
    method: str = "svd"
    discretization: str = "deterministic"
    evaluate_candidates: bool | None = None
    projection: str = "exact"
    solver: SolverConfig = SolverConfig()
    ica: IcaConfig = IcaConfig()
    seed: int = 0

    def __post_init__(self):
        l = self.candidates_per_iteration
        lp = self.added_per_iteration
        if not 1 <= lp <= l:
            raise ValueError(f"need 1 <= added ({lp}) <= candidates ({l})")
        if self.total_cells < lp:
            raise ValueError("total_cells must be >= added_per_iteration")
        if self.factorization_rank is not None and self.factorization_rank < l:
            raise ValueError("factorization_rank must be >= candidates_per_iteration")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if self.discretization not in _DISCRETIZATIONS:
            raise ValueError(f"discretization must be one of {_DISCRETIZATIONS}")
        if self.projection not in _PROJECTIONS:
            raise ValueError(f"projection must be one of {_PROJECTIONS}")
        if self.evaluate_candidates is None:
            object.__setattr__(self, "evaluate_candidates", lp < l)
        elif not self.evaluate_candidates and lp < l:
            raise ValueError("evaluation can only be skipped when added == candidates")

    @property
    def rank(self):
        if self.factorization_rank is None:
            return self.candidates_per_iteration
        return self.factorization_rank


@dataclass(frozen=True)
class IterationRecord:
    """One row of an inference trace.  ``loss`` is always the exact loss of
    the complex after this iteration, even in approximate-projection mode
    (the reporting recomputation is neither timed nor counted)."""

    iteration: int
    cells_added: tuple
    cells_total: int
    loss: float
    cumulative_seconds: float
    cumulative_solver_calls: int
    cumulative_solver_iterations: int
    notes: tuple = ()


@dataclass(frozen=True)
class InferenceTrace:
    records: tuple

    def losses(self):
        return np.array([r.loss for r in self.records])

    @property
    def final(self):
        return self.records[-1]


def _align_sign(b, boundary):
    """Flip the boundary's global sign so it agrees with ``b`` on the cycle
    edge with the largest |b| (ties: lowest edge id; zero weight: keep)."""
    weights = np.abs(b[boundary.edges])
    j = int(boundary.edges[np.argmax(weights)])
    value = b[j]
    if value != 0 and (1 if value > 0 else -1) != boundary.sign_of(j):
        return -boundary
    return boundary


def discretize_deterministic(graph, b):
    """Discretize a factor column into a cell: grow a forest by adding edges
    in decreasing |b| (ties: lower edge id; zero weight last, in id order);
    the first edge to close a cycle defines the cell, sign-aligned to b.

    Raises
    ------
    GraphIsForest
        If no edge ever closes a cycle.
    """
    b = np.asarray(b, dtype=np.float64)
    m = graph.edge_count
    if b.shape != (m,):
        raise ValueError("weight vector length must equal the edge count")
    order = np.lexsort((np.arange(m), -np.abs(b)))
    uf = UnionFind(graph.node_count)
    forest = set()
    for e in order:
        u, v = graph.edges[e]
        if uf.find(u) == uf.find(v):
            cycle = tree_cycle(graph, forest, e)
            return _align_sign(b, boundary_from_edge_set(graph, cycle))
        uf.union(u, v)
        forest.add(int(e))
    raise GraphIsForest("graph has no cycle")


def discretize_random_walk(graph, b, rng, restarts=20):
    """Discretize a factor column by a random walk weighted by |b|.

    The walk starts at the source of the max-|b| edge and repeatedly crosses
    an unused incident edge drawn with probability proportional to |b|
    (uniform if all unused incident weights are zero); the first revisited
    node closes the loop, which is returned sign-aligned to b.

    Raises
    ------
    WalkFailed
        If every restart dead-ends on a node with no unused incident edge.
    """
    b = np.asarray(b, dtype=np.float64)
    m = graph.edge_count
    if b.shape != (m,):
        raise ValueError("weight vector length must equal the edge count")
    start = graph.edges[int(np.argmax(np.abs(b)))][0]
    for _ in range(restarts):
        used = set()
        visited = {start: 0}
        order = [start]
        node = start
        while True:
            options = [(nbr, eid) for nbr, eid in graph.adjacency[node] if eid not in used]
            if not options:
                break
            weights = np.array([abs(b[eid]) for _, eid in options])
            total = weights.sum()
            if total > 0:
                pick = rng.choice(len(options), p=weights / total)
            else:
                pick = rng.integers(len(options))
            nbr, eid = options[pick]
            used.add(eid)
            if nbr in visited:
                walk = order[visited[nbr]:] + [nbr]
                return _align_sign(b, validate_cycle(graph, walk))
            visited[nbr] = len(order)
            order.append(nbr)
            node = nbr
    raise WalkFailed(f"no cycle closed in {restarts} restarts")


def candidate_search(complex_, flows_h, cfg, rng):
    """One candidate-search pass: factor the harmonic flows at rank r, keep
    the l best-scoring columns, and discretize each into a cell.

    Discretization failures and duplicates (within the batch or of cells
    already in the complex, up to sign) are dropped, so fewer than l
    candidates may come back.  Returns ``(candidates, factorization)``; the
    factorization feeds the approximate harmonic update.

    Raises
    ------
    DegenerateInput
        Propagated from the factorization when the flows are spent.
    """
    if cfg.method == "ica":
        ica_cfg = dataclasses.replace(cfg.ica, seed=int(rng.integers(2**63)))
        fact = fast_ica(flows_h, cfg.rank, ica_cfg)
    else:
        fact = truncated_svd(flows_h, cfg.rank)
    scores = column_scores(flows_h, fact)
    columns = select_columns(fact, scores, cfg.candidates_per_iteration)

    graph = complex_.graph
    seen = {c.canonical() for c in complex_.cells}
    candidates = []
    for b in columns:
        try:
            if cfg.discretization == "random_walk":
                cell = discretize_random_walk(graph, b, rng)
            else:
                cell = discretize_deterministic(graph, b)
        except (GraphIsForest, WalkFailed):
            continue
        key = cell.canonical()
        if key in seen:
            continue
        seen.add(key)
        candidates.append(cell)
    return candidates, fact


def evaluate_and_select(complex_, flows_gradfree, candidates, count, cfg, tally=None):
    """Pick ``count`` cells from the candidates.

    With evaluation on, each candidate is scored by the exact loss of the
    complex with that single cell added (one iterative solve per candidate)
    and the lowest losses win, ties in candidate order.  With evaluation
    off the leading ``count`` candidates pass through with zero solves.
    Fewer candidates than ``count`` simply all pass.
    """
    if not candidates:
        return []
    if not cfg.evaluate_candidates:
        return list(candidates[:count])
    scored = []
    for cell in candidates:
        trial = CellComplex(complex_.graph, complex_.cells + (cell,))
        scored.append(loss(trial, flows_gradfree, cfg.solver, tally))
    order = np.argsort(scored, kind="stable")[:count]
    return [candidates[i] for i in order]


def infer_mfci(graph, flows, cfg, rng=None, timer=None):
    """Run the full inference loop on raw flows.

    Gradient components are removed once at ingestion (one counted solve).
    The loop then alternates candidate search, selection, and cell addition
    until the complex reaches ``cfg.total_cells`` cells, the candidates run
    dry, or the remaining flows degenerate to zero.  The final batch is
    truncated so the cell budget is met exactly.

    Returns ``(complex, trace)``; the trace holds one record for the initial
    state (iteration 0) and one per loop iteration.
    """
    flows = np.asarray(flows, dtype=np.float64)
    if flows.ndim == 1:
        flows = flows[:, None]
    if flows.shape[0] != graph.edge_count:
        raise ValueError("flow matrix rows must equal the graph's edge count")
    if cfg.rank > min(flows.shape):
        raise ValueError(f"factorization rank {cfg.rank} exceeds min(m, s) = {min(flows.shape)}")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if timer is None:
        timer = make_timer()

    tally = SolverTally()
    t0 = timer()
    excluded = 0.0
    flows0 = remove_gradient(graph, flows, cfg.solver, tally)
    complex_ = CellComplex(graph)
    current = flows0.copy()

    records = [IterationRecord(0, (), 0, float(np.linalg.norm(flows0)), timer() - t0,
                               tally.calls, tally.iterations)]
    iteration = 0
    while complex_.cell_count < cfg.total_cells:
        iteration += 1
        notes = []
        try:
            candidates, fact = candidate_search(complex_, current, cfg, rng)
        except DegenerateInput:
            break
        if not candidates:
            break
        budget = cfg.total_cells - complex_.cell_count
        chosen = evaluate_and_select(complex_, flows0, candidates,
                                     min(cfg.added_per_iteration, budget), cfg, tally)
        complex_, added, _ = add_cells(complex_, chosen)
        if not added:
            break
        if len(added) < min(cfg.added_per_iteration, budget):
            notes.append("shortfall")
        if cfg.projection == "exact":
            current = harmonic_projection(complex_, flows0, cfg.solver, tally)
            exact_loss = float(np.linalg.norm(current))
        else:
            update = approx_harmonic_update(current, list(added), fact)
            current = update.flows
            if update.degenerate_span:
                notes.append("degenerate-span")
            mark = timer()
            exact_loss = loss(complex_, flows0, cfg.solver)
            excluded += timer() - mark
        records.append(IterationRecord(iteration, added, complex_.cell_count, exact_loss,
                                       timer() - t0 - excluded, tally.calls,
                                       tally.iterations, tuple(notes)))
    return complex_, InferenceTrace(tuple(records))
