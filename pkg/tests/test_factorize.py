import numpy as np
import pytest

from cellflow.factorize import (
    DegenerateInput,
    Factorization,
    IcaConfig,
    RankTooLarge,
    column_scores,
    fast_ica,
    select_columns,
    truncated_svd,
)
from cellflow.hodge import loss, remove_gradient
from cellflow.synth import SynthConfig, random_complex, sample_flows


class TestTruncatedSvd:
    def test_rank_one_column(self):
        H = np.array([[1.0], [1.0], [-1.0]])
        fact = truncated_svd(H, 1)
        direction = fact.B[:, 0] * np.sign(fact.B[0, 0])
        assert direction == pytest.approx(H[:, 0] / np.sqrt(3), abs=1e-12)
        assert abs(fact.C[0, 0]) == pytest.approx(np.sqrt(3), abs=1e-12)
        assert np.allclose(fact.B @ fact.C, H, atol=1e-12)

    def test_zero_matrix_degenerate(self):
        with pytest.raises(DegenerateInput):
            truncated_svd(np.zeros((4, 3)), 1)

    def test_diag_like_full_rank(self):
        H = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
        fact = truncated_svd(H, 2)
        assert np.linalg.norm(H - fact.B @ fact.C) < 1e-12
        sv = np.linalg.norm(fact.C, axis=1)
        assert sorted(sv, reverse=True) == pytest.approx([2.0, 1.0], abs=1e-12)

    def test_rank_too_large(self):
        with pytest.raises(RankTooLarge):
            truncated_svd(np.ones((3, 2)), 3)
        with pytest.raises(RankTooLarge):
            truncated_svd(np.ones((3, 2)), 0)

    def test_eckart_young_residual(self):
        rng = np.random.default_rng(0)
        H = rng.standard_normal((10, 6))
        sv = np.linalg.svd(H, compute_uv=False)
        for r in range(1, 6):
            fact = truncated_svd(H, r)
            residual = np.linalg.norm(H - fact.B @ fact.C)
            assert residual == pytest.approx(np.sqrt((sv[r:] ** 2).sum()), rel=1e-8)

    def test_residual_non_increasing_in_rank(self):
        rng = np.random.default_rng(1)
        H = rng.standard_normal((12, 8))
        residuals = [np.linalg.norm(H - (f := truncated_svd(H, r)).B @ f.C) for r in range(1, 8)]
        assert all(a >= b - 1e-10 for a, b in zip(residuals, residuals[1:]))


class TestFastIca:
    def test_rank_one_recovers_direction(self):
        rng = np.random.default_rng(3)
        b = np.array([1.0, 1.0, -1.0, 0.0, 0.0])
        c = rng.uniform(-1, 1, size=12)
        H = np.outer(b, c)
        fact = fast_ica(H, 1, IcaConfig(seed=0))
        cos = abs(fact.B[:, 0] @ b) / (np.linalg.norm(fact.B[:, 0]) * np.linalg.norm(b))
        assert cos >= 0.999
        assert np.allclose(fact.B @ fact.C, H, atol=1e-8)

    def test_disjoint_triangles_support_recovery(self):
        # Plant two independent uniform sources on disjoint supports and
        # demand support recovery in >= 9 of 10 seeds.  The finite-sample
        # rotation error of any FastICA decays like 1/sqrt(s) (~15% at 64
        # samples, ~5% at 1024; scikit-learn's FastICA shows the same), so
        # the sample count is sized to put the 10% support threshold well
        # clear of the noise floor.
        b1 = np.array([1.0, 1.0, -1.0, 0.0, 0.0, 0.0])
        b2 = np.array([0.0, 0.0, 0.0, 1.0, 1.0, -1.0])
        hits = 0
        for seed in range(10):
            rng = np.random.default_rng(1000 + seed)
            c = rng.uniform(-1.0, 1.0, size=(2, 1024))
            H = np.outer(b1, c[0]) + np.outer(b2, c[1])
            fact = fast_ica(H, 2, IcaConfig(seed=seed))
            supports = []
            for j in range(2):
                col = np.abs(fact.B[:, j])
                supports.append(frozenset(np.flatnonzero(col > 0.1 * col.max())))
            expected = {frozenset({0, 1, 2}), frozenset({3, 4, 5})}
            if set(supports) == expected:
                hits += 1
        assert hits >= 9

    def test_single_sample_rejected(self):
        with pytest.raises(ValueError, match="2 flow samples"):
            fast_ica(np.ones((4, 1)), 1)

    def test_rank_too_large(self):
        with pytest.raises(RankTooLarge):
            fast_ica(np.ones((3, 4)) + np.eye(3, 4), 4)

    def test_reconstruction_not_better_than_svd(self):
        rng = np.random.default_rng(8)
        H = rng.standard_normal((15, 10))
        for r in (1, 3, 5):
            svd_fact = truncated_svd(H, r)
            ica_fact = fast_ica(H, r, IcaConfig(seed=2))
            svd_err = np.linalg.norm(H - svd_fact.B @ svd_fact.C)
            ica_err = np.linalg.norm(H - ica_fact.B @ ica_fact.C)
            assert ica_err >= svd_err - 1e-6

    def test_reproducible_bit_for_bit(self):
        rng = np.random.default_rng(5)
        H = rng.standard_normal((10, 20))
        a = fast_ica(H, 3, IcaConfig(seed=7))
        b = fast_ica(H, 3, IcaConfig(seed=7))
        assert np.array_equal(a.B, b.B) and np.array_equal(a.C, b.C)

    def test_sign_convention(self):
        rng = np.random.default_rng(6)
        H = rng.standard_normal((8, 30))
        fact = fast_ica(H, 2, IcaConfig(seed=1))
        for j in range(2):
            assert fact.B[np.argmax(np.abs(fact.B[:, j])), j] > 0

    def test_columns_ordered_by_score(self):
        rng = np.random.default_rng(9)
        H = rng.standard_normal((10, 40))
        fact = fast_ica(H, 3, IcaConfig(seed=4))
        scores = column_scores(H, fact)
        assert (np.diff(scores) >= -1e-9).all()


class TestColumnScores:
    def test_exact_rank_one_scores_zero(self):
        H = np.outer([1.0, 1.0, -1.0], [2.0, 3.0])
        fact = truncated_svd(H, 1)
        assert column_scores(H, fact)[0] == pytest.approx(0.0, abs=1e-10)

    def test_wrong_direction_arithmetic(self):
        H = np.array([[1.0], [1.0], [-1.0]])
        fact = Factorization(np.array([[1.0], [0.0], [0.0]]), np.array([[1.0]]), "svd", 1)
        assert column_scores(H, fact)[0] == pytest.approx(2.0)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(10)
        H = rng.standard_normal((6, 5))
        fact = truncated_svd(H, 3)
        perm = [2, 0, 1]
        permuted = Factorization(fact.B[:, perm], fact.C[perm], "svd", 3)
        assert column_scores(H, permuted) == pytest.approx(column_scores(H, fact)[perm])


class TestSelectColumns:
    def test_sorts_by_score(self):
        fact = Factorization(np.arange(9.0).reshape(3, 3) + 1, np.ones((3, 3)), "svd", 3)
        chosen = select_columns(fact, [3.0, 1.0, 2.0], 2)
        assert np.array_equal(chosen[0], fact.B[:, 1])
        assert np.array_equal(chosen[1], fact.B[:, 2])

    def test_all_columns_sorted(self):
        fact = Factorization(np.eye(3), np.ones((3, 3)), "svd", 3)
        chosen = select_columns(fact, [2.0, 0.0, 1.0], 3)
        assert np.array_equal(np.stack(chosen, axis=1), fact.B[:, [1, 2, 0]])

    def test_ties_keep_index_order(self):
        fact = Factorization(np.eye(3), np.ones((3, 3)), "svd", 3)
        chosen = select_columns(fact, [1.0, 1.0, 1.0], 3)
        assert np.array_equal(np.stack(chosen, axis=1), fact.B)

    def test_count_bounded_by_rank(self):
        fact = Factorization(np.eye(2), np.ones((2, 2)), "svd", 2)
        with pytest.raises(ValueError):
            select_columns(fact, [1.0, 2.0], 3)


def test_discrete_solution_never_beats_svd():
    # Eckart-Young lower bound: exact complex residual >= rank-k SVD residual
    for seed in range(6):
        cpx = random_complex(SynthConfig(10, 0.6, 4, 1, seed=40 + seed))
        rng = np.random.default_rng(seed)
        flows = sample_flows(cpx, 6, 1.0, 0.4, rng)
        flows0 = remove_gradient(cpx.graph, flows)
        exact = loss(cpx, flows0)
        sv = np.linalg.svd(flows0, compute_uv=False)
        k = cpx.cell_count
        svd_residual = np.sqrt((sv[k:] ** 2).sum())
        assert exact >= svd_residual - 1e-6
