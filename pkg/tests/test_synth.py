import numpy as np
import pytest

from cellflow.complexes import build_incidence
from cellflow.synth import (
    GenerationFailed,
    SynthConfig,
    random_complex,
    reference_loss,
    sample_flows,
)


class TestRandomComplex:
    def test_triangle_instance(self):
        cpx = random_complex(SynthConfig(3, 1.0, 1, 1, seed=0))
        assert cpx.graph.node_count == 3 and cpx.graph.edge_count == 3
        assert cpx.cell_count == 1
        assert {int(e) for e in cpx.cells[0].edges} == {0, 1, 2}

    def test_invariants_hold(self):
        for seed in range(10):
            cpx = random_complex(SynthConfig(15, 0.4, 5, 1, seed=seed))
            B1 = build_incidence(cpx.graph).toarray().astype(np.int64)
            B2 = cpx.boundary_matrix().toarray().astype(np.int64)
            assert (B1 @ B2 == 0).all()
            keys = [c.canonical() for c in cpx.cells]
            assert len(set(keys)) == len(keys) == 5

    def test_dense_benchmark_scale(self):
        cpx = random_complex(SynthConfig(40, 0.9, 50, 64, seed=1))
        assert cpx.cell_count == 50
        assert cpx.graph.node_count == 40

    def test_deterministic_given_seed(self):
        a = random_complex(SynthConfig(12, 0.5, 4, 1, seed=77))
        b = random_complex(SynthConfig(12, 0.5, 4, 1, seed=77))
        assert a.graph.edges == b.graph.edges
        assert [c.canonical() for c in a.cells] == [c.canonical() for c in b.cells]

    def test_infeasible_raises(self):
        # a single node cannot host a cycle at any draw
        with pytest.raises(GenerationFailed):
            random_complex(SynthConfig(1, 1.0, 1, 1, seed=0))


class TestSampleFlows:
    def test_noiseless_triangle_columns_proportional(self):
        cpx = random_complex(SynthConfig(3, 1.0, 1, 1, seed=0))
        flows = sample_flows(cpx, 5, 1.0, 0.0, np.random.default_rng(1))
        b = cpx.cells[0].dense()
        for j in range(5):
            col = flows[:, j]
            assert np.allclose(col, (col @ b / 3.0) * b, atol=1e-12)

    def test_all_zero_when_both_stds_zero(self):
        cpx = random_complex(SynthConfig(3, 1.0, 1, 1, seed=0))
        flows = sample_flows(cpx, 4, 0.0, 0.0, np.random.default_rng(2))
        assert np.abs(flows).max() == 0.0

    def test_expected_column_norm_monte_carlo(self):
        # derived closed form: E||f||^2 = cell_std^2 ||B2||_F^2 + m noise_std^2
        cpx = random_complex(SynthConfig(10, 0.6, 3, 1, seed=5))
        m = cpx.graph.edge_count
        cell_std, noise_std = 1.3, 0.7
        B2 = cpx.boundary_matrix(dtype=np.float64).toarray()
        expected = cell_std**2 * np.linalg.norm(B2) ** 2 + m * noise_std**2
        flows = sample_flows(cpx, 10_000, cell_std, noise_std, np.random.default_rng(3))
        observed = (flows**2).sum(axis=0).mean()
        assert abs(observed - expected) <= 0.05 * expected

    def test_deterministic_given_seed(self):
        cpx = random_complex(SynthConfig(8, 0.7, 2, 1, seed=9))
        a = sample_flows(cpx, 6, 1.0, 0.5, np.random.default_rng(42))
        b = sample_flows(cpx, 6, 1.0, 0.5, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_requires_a_cell(self):
        from cellflow.complexes import CellComplex, OrientedGraph

        empty = CellComplex(OrientedGraph(3, [(0, 1), (1, 2), (0, 2)]))
        with pytest.raises(ValueError):
            sample_flows(empty, 3, 1.0, 0.0, np.random.default_rng(0))


def test_reference_loss_matches_noise_scale():
    cpx = random_complex(SynthConfig(12, 0.7, 4, 1, seed=3))
    noiseless = sample_flows(cpx, 6, 1.0, 0.0, np.random.default_rng(0))
    assert reference_loss(cpx, noiseless) <= 1e-7
    noisy = sample_flows(cpx, 6, 1.0, 0.5, np.random.default_rng(0))
    assert reference_loss(cpx, noisy) > 0.1
