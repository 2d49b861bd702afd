"""Low-rank factorizations of harmonic flows, column scoring, and selection.

A factorization ``H ~ B @ C`` relaxes the discrete boundary-matrix fit: each
column of B stands in for one cell-boundary vector, each row of C for the
circulation strengths of that cell across the flow samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class RankTooLarge(Exception):
    """Requested rank exceeds what the flow matrix supports."""


class DegenerateInput(Exception):
    """The flow matrix is (numerically) zero; nothing left to factor."""


_ZERO_SCALE = 1e-12


@dataclass(frozen=True)
class Factorization:
    """Rank-r approximation ``B @ C`` of an edges-by-samples flow matrix.

    ``converged`` is only meaningful for ICA: False flags that some
    component hit its iteration budget (the best iterate is still
    returned)."""

    B: np.ndarray
    C: np.ndarray
    method: str
    rank: int
    converged: bool = True

    def product(self):
        return self.B @ self.C


@dataclass(frozen=True)
class IcaConfig:
    """FastICA settings: log-cosh contrast, deflation, SVD whitening without
    sample centering (flows are mean-meaningful), seeded initial directions."""

    max_iterations: int = 200
    tolerance: float = 1e-4
    contrast: str = "logcosh"
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.contrast != "logcosh":
            raise ValueError(f"unsupported contrast {self.contrast!r}")


def _check_factor_input(H, r):
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2:
        raise ValueError("flow matrix must be 2-dimensional")
    m, s = H.shape
    if not 1 <= r <= min(m, s):
        raise RankTooLarge(f"rank {r} not in [1, min({m}, {s})]")
    if np.linalg.norm(H) < _ZERO_SCALE * np.sqrt(m * s):
        raise DegenerateInput("flow matrix is numerically zero")
    return H


def truncated_svd(H, r):
    """Best rank-r approximation: B holds the r leading left singular vectors
    (unit columns), C the corresponding singular values times right singular
    vectors, so the residual is the tail singular-value norm."""
    H = _check_factor_input(H, r)
    U, sv, Vt = np.linalg.svd(H, full_matrices=False)
    B = U[:, :r].copy()
    C = sv[:r, None] * Vt[:r]
    return Factorization(B, C, "svd", int(r))


def fast_ica(H, r, cfg=IcaConfig()):
    """FastICA factorization: r statistically independent source rows in C and
    the matching mixing columns in B.

    Whitening keeps the r leading SVD directions of the raw (uncentered)
    data, so ``B @ C`` reconstructs the same rank-r subspace the SVD would;
    what changes is the basis within it.  Component signs are fixed so the
    largest-magnitude entry of each B column is positive, and columns are
    ordered by ascending column score.  Deterministic given cfg.seed.
    """
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] < 2:
        raise ValueError("fast_ica needs at least 2 flow samples")
    H = _check_factor_input(H, r)
    m, s = H.shape

    U, sv, Vt = np.linalg.svd(H, full_matrices=False)
    # Guard exact zeros so rank-deficient tails whiten to harmless noise
    # instead of dividing by zero.
    sv_r = np.maximum(sv[:r], sv[0] * 1e-15)
    Z = np.sqrt(s) * Vt[:r]

    rng = np.random.default_rng(cfg.seed)
    W = np.zeros((r, r))
    converged = True
    for comp in range(r):
        w = rng.standard_normal(r)
        w /= np.linalg.norm(w)
        ok = False
        for _ in range(cfg.max_iterations):
            proj = w @ Z
            g = np.tanh(proj)
            g_prime = 1.0 - g * g
            w_new = (Z * g).mean(axis=1) - g_prime.mean() * w
            if comp:
                w_new -= W[:comp].T @ (W[:comp] @ w_new)
            norm = np.linalg.norm(w_new)
            if norm < 1e-12:
                w_new = rng.standard_normal(r)
                if comp:
                    w_new -= W[:comp].T @ (W[:comp] @ w_new)
                norm = np.linalg.norm(w_new)
            w_new /= norm
            delta = abs(abs(w_new @ w) - 1.0)
            w = w_new
            if delta < cfg.tolerance:
                ok = True
                break
        if not ok:
            converged = False
        W[comp] = w

    C = W @ Z
    B = (U[:, :r] * sv_r) @ W.T / np.sqrt(s)
    # Fix signs: largest-|entry| of each mixing column positive.
    for j in range(r):
        i = np.argmax(np.abs(B[:, j]))
        if B[i, j] < 0:
            B[:, j] = -B[:, j]
            C[j] = -C[j]
    fact = Factorization(B, C, "ica", int(r), converged)
    order = np.argsort(column_scores(H, fact), kind="stable")
    return Factorization(B[:, order].copy(), C[order].copy(), "ica", int(r), converged)


def column_scores(H, fact):
    """Entrywise-L1 residual of each rank-1 term: how well column j of B with
    row j of C explains the whole flow matrix on its own."""
    H = np.asarray(H, dtype=np.float64)
    if fact.B.shape[0] != H.shape[0] or fact.C.shape[1] != H.shape[1]:
        raise ValueError("factorization shape does not match the flow matrix")
    scores = np.empty(fact.rank)
    for j in range(fact.rank):
        scores[j] = np.abs(H - np.outer(fact.B[:, j], fact.C[j])).sum()
    return scores


def select_columns(fact, scores, count):
    """The ``count`` columns of B with the lowest scores, ascending; ties keep
    the lower column index."""
    scores = np.asarray(scores)
    if count > fact.rank:
        raise ValueError(f"cannot select {count} of {fact.rank} columns")
    order = np.argsort(scores, kind="stable")[:count]
    return [fact.B[:, j].copy() for j in order]
