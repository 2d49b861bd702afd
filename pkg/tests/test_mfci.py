import numpy as np
import pytest

from cellflow.complexes import CellComplex, OrientedGraph, validate_cycle
from cellflow.hodge import SolverTally, harmonic_projection, remove_gradient
from cellflow.mfci import (
    GraphIsForest,
    InferenceConfig,
    WalkFailed,
    candidate_search,
    discretize_deterministic,
    discretize_random_walk,
    evaluate_and_select,
    infer_mfci,
)
from cellflow.synth import SynthConfig, random_complex, sample_flows


def t3():
    return OrientedGraph(3, [(0, 1), (1, 2), (0, 2)])


def k4():
    return OrientedGraph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


def two_triangles_with_bridge():
    """Two node-disjoint triangles joined by one bridge edge."""
    return OrientedGraph(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)])


def all_simple_cycles(graph):
    """Oracle: enumerate every simple cycle via networkx."""
    import networkx as nx

    G = nx.Graph()
    G.add_nodes_from(range(graph.node_count))
    G.add_edges_from(graph.edges)
    for nodes in nx.simple_cycles(G):
        yield validate_cycle(graph, list(nodes) + [nodes[0]])


class TestInferenceConfig:
    def test_defaults_resolve(self):
        cfg = InferenceConfig(total_cells=4, candidates_per_iteration=8, added_per_iteration=1)
        assert cfg.evaluate_candidates is True
        assert cfg.rank == 8

    def test_no_evaluation_only_when_all_added(self):
        cfg = InferenceConfig(total_cells=8, candidates_per_iteration=8, added_per_iteration=8)
        assert cfg.evaluate_candidates is False
        with pytest.raises(ValueError, match="skipped"):
            InferenceConfig(total_cells=8, candidates_per_iteration=8,
                            added_per_iteration=2, evaluate_candidates=False)

    def test_added_bounded_by_candidates(self):
        with pytest.raises(ValueError):
            InferenceConfig(total_cells=8, candidates_per_iteration=2, added_per_iteration=3)

    def test_rank_at_least_candidates(self):
        with pytest.raises(ValueError, match="rank"):
            InferenceConfig(total_cells=4, candidates_per_iteration=4,
                            added_per_iteration=1, factorization_rank=2)


class TestDiscretizeDeterministic:
    def test_k4_ordering_rule(self):
        b = np.array([0.9, -0.5, 0.1, 0.8, 0.05, 0.02])
        cell = discretize_deterministic(k4(), b)
        assert cell.dense().tolist() == [1, -1, 0, 1, 0, 0]

    def test_t3_all_ties(self):
        cell = discretize_deterministic(t3(), np.array([1.0, 1.0, -1.0]))
        assert cell.dense().tolist() == [1, 1, -1]

    def test_recovers_every_planted_k4_cycle(self):
        # derived: the 7 simple cycles of K4 as exact boundary inputs
        g = k4()
        cycles = list(all_simple_cycles(g))
        assert len(cycles) == 7
        for planted in cycles:
            out = discretize_deterministic(g, planted.dense())
            assert out == planted or out == -planted
            # sign alignment pins the exact orientation
            assert out == planted

    def test_forest_raises(self):
        g = OrientedGraph(4, [(0, 1), (1, 2), (2, 3)])
        with pytest.raises(GraphIsForest):
            discretize_deterministic(g, np.array([1.0, 0.5, 0.2]))

    def test_pure_function(self):
        g = k4()
        b = np.array([0.3, -0.9, 0.4, 0.2, 0.8, -0.1])
        first = discretize_deterministic(g, b)
        assert all(discretize_deterministic(g, b) == first for _ in range(5))


class TestDiscretizeRandomWalk:
    def test_t3_only_cycle(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            cell = discretize_random_walk(t3(), np.array([1.0, 1.0, -1.0]), rng)
            assert cell.dense().tolist() == [1, 1, -1]

    def test_k4_supported_triangle_forced(self):
        # derived: the walk cannot leave the support while support edges
        # remain, so the supported triangle comes back with probability 1
        g = k4()
        b = np.zeros(6)
        b[[0, 3, 1]] = 1.0
        rng = np.random.default_rng(1)
        for _ in range(25):
            cell = discretize_random_walk(g, b, rng)
            assert set(cell.edges.tolist()) == {0, 1, 3}

    def test_tree_walk_fails(self):
        g = OrientedGraph(4, [(0, 1), (1, 2), (2, 3)])
        with pytest.raises(WalkFailed):
            discretize_random_walk(g, np.array([1.0, 0.5, 0.2]), np.random.default_rng(0))


class TestCandidateSearch:
    def test_t3_svd_single_candidate(self):
        g = t3()
        cfg = InferenceConfig(total_cells=1, candidates_per_iteration=1)
        H = np.array([[1.0], [1.0], [-1.0]])
        candidates, fact = candidate_search(CellComplex(g), H, cfg, np.random.default_rng(0))
        assert len(candidates) == 1
        assert candidates[0].dense().tolist() == [1, 1, -1]
        assert fact.method == "svd" and fact.rank == 1

    def test_disjoint_triangles_both_found(self):
        # derived oracle: the planted cells themselves
        g = two_triangles_with_bridge()
        left = validate_cycle(g, [0, 1, 2, 0])
        right = validate_cycle(g, [3, 4, 5, 3])
        rng = np.random.default_rng(17)
        c = rng.standard_normal((2, 8))
        H = np.outer(left.dense(), c[0]) + np.outer(right.dense(), c[1])
        cfg = InferenceConfig(total_cells=2, candidates_per_iteration=2, added_per_iteration=1)
        candidates, _ = candidate_search(CellComplex(g), H, cfg, np.random.default_rng(0))
        keys = {cell.canonical() for cell in candidates}
        assert keys == {left.canonical(), right.canonical()}

    def test_duplicates_collapse(self):
        # 3 candidate columns on a graph with a single simple cycle
        g = t3()
        rng = np.random.default_rng(2)
        H = np.outer([1.0, 1.0, -1.0], rng.standard_normal(3))
        cfg = InferenceConfig(total_cells=1, candidates_per_iteration=3, added_per_iteration=1)
        candidates, _ = candidate_search(CellComplex(g), H, cfg, np.random.default_rng(0))
        assert len(candidates) == 1

    def test_existing_cells_not_reproposed(self):
        g = t3()
        triangle = validate_cycle(g, [0, 1, 2, 0])
        cpx = CellComplex(g, [triangle])
        H = np.array([[1.0], [1.0], [-1.0]])
        cfg = InferenceConfig(total_cells=2, candidates_per_iteration=1)
        candidates, _ = candidate_search(cpx, H, cfg, np.random.default_rng(0))
        assert candidates == []


class TestEvaluateAndSelect:
    def test_t3_triangle_wins(self):
        g = t3()
        triangle = validate_cycle(g, [0, 1, 2, 0])
        cfg = InferenceConfig(total_cells=1, candidates_per_iteration=2, added_per_iteration=1)
        chosen = evaluate_and_select(CellComplex(g), np.array([1.0, 1.0, -1.0]),
                                     [triangle], 1, cfg)
        assert chosen == [triangle]

    def test_k4_brute_force_agreement(self):
        # derived: evaluate all four K4 triangles by the dense oracle
        g = k4()
        F = validate_cycle(g, [0, 1, 2, 0]).dense()[:, None]
        triangles = [validate_cycle(g, [0, 1, 2, 0]), validate_cycle(g, [0, 1, 3, 0]),
                     validate_cycle(g, [0, 2, 3, 0]), validate_cycle(g, [1, 2, 3, 1])]
        oracle_losses = []
        for cell in triangles:
            b = cell.dense()[:, None]
            P = b @ np.linalg.pinv(b)
            oracle_losses.append(np.linalg.norm(F - P @ F))
        assert int(np.argmin(oracle_losses)) == 0 and min(oracle_losses) < 1e-12
        cfg = InferenceConfig(total_cells=1, candidates_per_iteration=4, added_per_iteration=1)
        chosen = evaluate_and_select(CellComplex(g), F, triangles, 1, cfg)
        assert chosen == [triangles[0]]

    def test_skip_evaluation_runs_no_solves(self):
        g = k4()
        F = validate_cycle(g, [0, 1, 2, 0]).dense()
        cells = [validate_cycle(g, [0, 1, 2, 0]), validate_cycle(g, [0, 1, 3, 0])]
        cfg = InferenceConfig(total_cells=2, candidates_per_iteration=2, added_per_iteration=2)
        tally = SolverTally()
        chosen = evaluate_and_select(CellComplex(g), F, cells, 2, cfg, tally)
        assert chosen == cells and tally.calls == 0

    def test_shortfall_returns_all(self):
        g = t3()
        triangle = validate_cycle(g, [0, 1, 2, 0])
        cfg = InferenceConfig(total_cells=3, candidates_per_iteration=3, added_per_iteration=3)
        chosen = evaluate_and_select(CellComplex(g), triangle.dense(), [triangle], 3, cfg)
        assert chosen == [triangle]


class TestInferMfci:
    def test_t3_single_cell(self):
        complex_, trace = infer_mfci(t3(), np.array([1.0, 1.0, -1.0]),
                                     InferenceConfig(total_cells=1))
        assert complex_.cell_count == 1
        assert len(trace.records) == 2
        assert trace.final.loss <= 1e-8
        assert [r.iteration for r in trace.records] == [0, 1]

    def test_k4_two_planted_cells(self):
        g = k4()
        b1 = validate_cycle(g, [0, 1, 2, 0]).dense()
        b2 = validate_cycle(g, [0, 1, 3, 0]).dense()
        rng = np.random.default_rng(3)
        F = np.outer(b1, rng.standard_normal(4)) + np.outer(b2, rng.standard_normal(4))
        cfg = InferenceConfig(total_cells=2, candidates_per_iteration=2, added_per_iteration=1)
        complex_, trace = infer_mfci(g, F, cfg)
        assert complex_.cell_count == 2
        assert trace.final.loss <= 1e-6

    @pytest.mark.parametrize("method", ["svd", "ica"])
    @pytest.mark.parametrize("discretization", ["deterministic", "random_walk"])
    def test_noiseless_single_cycle_recovery(self, method, discretization):
        cpx = random_complex(SynthConfig(8, 0.7, 1, 1, seed=23))
        rng = np.random.default_rng(5)
        flows = sample_flows(cpx, 4, 1.0, 0.0, rng)
        cfg = InferenceConfig(total_cells=1, candidates_per_iteration=1, method=method,
                              discretization=discretization, seed=11)
        complex_, trace = infer_mfci(cpx.graph, flows, cfg)
        assert trace.final.loss <= 1e-6
        assert complex_.cells[0].canonical() == cpx.cells[0].canonical()

    def test_exact_trace_monotone(self):
        cpx = random_complex(SynthConfig(12, 0.6, 5, 1, seed=31))
        rng = np.random.default_rng(7)
        flows = sample_flows(cpx, 8, 1.0, 0.3, rng)
        cfg = InferenceConfig(total_cells=5, candidates_per_iteration=3, added_per_iteration=1)
        _, trace = infer_mfci(cpx.graph, flows, cfg)
        losses = trace.losses()
        assert (np.diff(losses) <= 1e-8).all()

    def test_fast_variant_runs_zero_loop_solves(self):
        cpx = random_complex(SynthConfig(12, 0.7, 6, 1, seed=37))
        rng = np.random.default_rng(9)
        flows = sample_flows(cpx, 8, 1.0, 0.2, rng)
        cfg = InferenceConfig(total_cells=6, candidates_per_iteration=2, added_per_iteration=2,
                              projection="approximate")
        complex_, trace = infer_mfci(cpx.graph, flows, cfg)
        assert cfg.evaluate_candidates is False
        # only the single gradient-removal call at ingestion is ever counted
        assert all(r.cumulative_solver_calls == 1 for r in trace.records)
        assert complex_.cell_count >= 1

    def test_budget_never_overshot(self):
        cpx = random_complex(SynthConfig(12, 0.7, 6, 1, seed=41))
        rng = np.random.default_rng(13)
        flows = sample_flows(cpx, 8, 1.0, 0.2, rng)
        cfg = InferenceConfig(total_cells=5, candidates_per_iteration=4, added_per_iteration=4,
                              projection="approximate")
        complex_, _ = infer_mfci(cpx.graph, flows, cfg)
        assert complex_.cell_count <= 5

    def test_every_added_cell_is_valid(self):
        from cellflow.complexes import check_cell

        cpx = random_complex(SynthConfig(10, 0.7, 4, 1, seed=43))
        rng = np.random.default_rng(15)
        flows = sample_flows(cpx, 6, 1.0, 0.5, rng)
        cfg = InferenceConfig(total_cells=4, candidates_per_iteration=2, added_per_iteration=1,
                              discretization="random_walk", seed=3)
        complex_, trace = infer_mfci(cpx.graph, flows, cfg)
        for record in trace.records:
            for cell in record.cells_added:
                check_cell(cpx.graph, cell)

    def test_approximate_reports_exact_loss(self):
        cpx = random_complex(SynthConfig(10, 0.8, 4, 1, seed=47))
        rng = np.random.default_rng(17)
        flows = sample_flows(cpx, 8, 1.0, 0.1, rng)
        cfg = InferenceConfig(total_cells=4, candidates_per_iteration=2, added_per_iteration=2,
                              projection="approximate")
        complex_, trace = infer_mfci(cpx.graph, flows, cfg)
        flows0 = remove_gradient(cpx.graph, flows)
        recomputed = float(np.linalg.norm(harmonic_projection(complex_, flows0)))
        assert trace.final.loss == pytest.approx(recomputed, rel=1e-6)

    def test_deterministic_given_seed(self):
        cpx = random_complex(SynthConfig(10, 0.7, 4, 1, seed=53))
        rng_data = np.random.default_rng(19)
        flows = sample_flows(cpx, 8, 1.0, 0.4, rng_data)
        cfg = InferenceConfig(total_cells=4, candidates_per_iteration=3, added_per_iteration=1,
                              discretization="random_walk", method="ica", seed=21)
        first, trace_a = infer_mfci(cpx.graph, flows, cfg)
        second, trace_b = infer_mfci(cpx.graph, flows, cfg)
        assert [c.canonical() for c in first.cells] == [c.canonical() for c in second.cells]
        assert trace_a.losses() == pytest.approx(trace_b.losses(), abs=0)
