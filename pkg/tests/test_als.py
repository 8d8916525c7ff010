"""Implicit-feedback factorization: exact objective, monotonicity, lookups."""

from __future__ import annotations

import numpy as np
import pytest

from sitgen.features.als import (
    EmbeddingModel,
    InteractionMatrix,
    train_user_embeddings,
)


def dense_objective(model, X, reg, alpha):
    """Brute-force reference: materialize every (user, track) pair."""
    U, V = model.user_factors, model.track_factors
    n_u, n_t = U.shape[0], V.shape[0]
    conf = np.ones((n_u, n_t))
    pref = np.zeros((n_u, n_t))
    for r, c, v in zip(X.rows, X.cols, X.counts):
        conf[r, c] = 1.0 + alpha * v
        pref[r, c] = 1.0
    scores = U @ V.T
    fit = float(np.sum(conf * (pref - scores) ** 2))
    penalty = reg * (float(np.sum(U * U)) + float(np.sum(V * V)))
    return fit + penalty


def random_interactions(rng, n_users=12, n_tracks=20, nnz=60):
    counts = {}
    for _ in range(nnz):
        u = f"u{rng.integers(n_users):03d}"
        t = f"t{rng.integers(n_tracks):03d}"
        counts[(u, t)] = counts.get((u, t), 0) + int(rng.integers(1, 6))
    return InteractionMatrix.from_counts(counts)


class TestInteractionMatrix:
    def test_from_counts_sorted_ids(self):
        X = InteractionMatrix.from_counts({("b", "t2"): 1, ("a", "t1"): 2})
        assert X.user_ids == ["a", "b"]
        assert X.track_ids == ["t1", "t2"]
        assert X.nnz == 2

    def test_zero_counts_dropped(self):
        X = InteractionMatrix.from_counts({("a", "t1"): 0, ("a", "t2"): 3})
        assert X.nnz == 1

    def test_explicit_zero_rejected_in_constructor(self):
        with pytest.raises(ValueError):
            InteractionMatrix(
                ["a"], ["t"], np.array([0]), np.array([0]), np.array([0.0])
            )

    def test_csv_round_trip(self, tmp_path):
        X = InteractionMatrix.from_counts(
            {("u1", "t1"): 3, ("u1", "t2"): 1, ("u2", "t1"): 7}
        )
        path = tmp_path / "inter.csv"
        X.to_csv(path)
        Y = InteractionMatrix.from_csv(path)
        assert Y.user_ids == X.user_ids
        assert Y.track_ids == X.track_ids
        np.testing.assert_array_equal(Y.counts, X.counts)


class TestObjective:
    def test_initial_objective_matches_dense_oracle(self):
        rng = np.random.default_rng(0)
        X = random_interactions(rng)
        reg, alpha = 0.01, 40.0
        model = train_user_embeddings(X, d=4, reg=reg, alpha=alpha, iters=0, seed=0)
        oracle = dense_objective(model, X, reg, alpha)
        assert model.objective_history[0] == pytest.approx(oracle, rel=1e-10)

    def test_final_objective_matches_dense_oracle(self):
        rng = np.random.default_rng(1)
        X = random_interactions(rng)
        reg, alpha = 0.5, 10.0
        model = train_user_embeddings(X, d=5, reg=reg, alpha=alpha, iters=6, seed=1)
        oracle = dense_objective(model, X, reg, alpha)
        assert model.objective_history[-1] == pytest.approx(oracle, rel=1e-10)

    @pytest.mark.parametrize("seed", range(8))
    def test_objective_non_increasing_every_iteration(self, seed):
        rng = np.random.default_rng(seed)
        X = random_interactions(rng, n_users=10, n_tracks=14, nnz=45)
        model = train_user_embeddings(X, d=4, iters=10, seed=seed)
        hist = model.objective_history
        assert len(hist) == 11
        for prev, cur in zip(hist, hist[1:]):
            assert cur <= prev + 1e-9 * max(1.0, abs(prev))

    def test_objective_strictly_improves_from_random_init(self):
        rng = np.random.default_rng(3)
        X = random_interactions(rng)
        model = train_user_embeddings(X, d=4, iters=5, seed=3)
        assert model.objective_history[-1] < model.objective_history[0]


class TestTraining:
    def test_deterministic_given_seed(self):
        X = InteractionMatrix.from_counts(
            {(f"u{i}", f"t{j}"): (i + j) % 3 + 1 for i in range(6) for j in range(8)}
        )
        a = train_user_embeddings(X, d=3, iters=4, seed=42)
        b = train_user_embeddings(X, d=3, iters=4, seed=42)
        np.testing.assert_array_equal(a.user_factors, b.user_factors)
        np.testing.assert_array_equal(a.track_factors, b.track_factors)
        c = train_user_embeddings(X, d=3, iters=4, seed=43)
        assert not np.array_equal(a.user_factors, c.user_factors)

    def test_dimension_guard(self):
        X = InteractionMatrix.from_counts({("u1", "t1"): 1, ("u2", "t2"): 1})
        with pytest.raises(ValueError):
            train_user_embeddings(X, d=3)

    def test_empty_matrix_rejected(self):
        X = InteractionMatrix([], [], np.array([]), np.array([]), np.array([]))
        with pytest.raises(ValueError):
            train_user_embeddings(X, d=1)

    def test_shapes_and_lookup(self):
        rng = np.random.default_rng(4)
        X = random_interactions(rng, n_users=9, n_tracks=11)
        model = train_user_embeddings(X, d=4, iters=3, seed=4)
        assert model.user_factors.shape == (X.n_users, 4)
        assert model.track_factors.shape == (X.n_tracks, 4)
        assert model.dim == 4
        known = X.user_ids[0]
        emb = model.user_embedding(known)
        np.testing.assert_array_equal(emb, model.user_factors[0])
        assert model.user_embedding("nobody") is None

    def test_observed_pairs_score_near_one(self):
        # With high confidence on observed pairs, their reconstructed
        # preference should approach 1.
        X = InteractionMatrix.from_counts(
            {(f"u{i}", f"t{j}"): 5 for i in range(8) for j in range(10) if (i + j) % 3}
        )
        model = train_user_embeddings(X, d=6, reg=0.01, alpha=80.0, iters=12, seed=0)
        scores = np.einsum(
            "ij,ij->i", model.user_factors[X.rows], model.track_factors[X.cols]
        )
        assert scores.mean() > 0.8

    def test_users_with_identical_history_get_close_embeddings(self):
        counts = {}
        for j in range(10):
            counts[("twin_a", f"t{j}")] = 3 if j < 5 else 0
            counts[("twin_b", f"t{j}")] = 3 if j < 5 else 0
            counts[("other", f"t{j}")] = 0 if j < 5 else 3
        X = InteractionMatrix.from_counts({k: v for k, v in counts.items() if v})
        model = train_user_embeddings(X, d=3, iters=10, seed=0)
        a = model.user_embedding("twin_a")
        b = model.user_embedding("twin_b")
        o = model.user_embedding("other")
        assert np.linalg.norm(a - b) < 1e-6  # identical normal equations
        assert np.linalg.norm(a - o) > 1e-2
