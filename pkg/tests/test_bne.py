"""Tests for the tBNE ADMM updates and fitting loop."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvkit.bne import (BNEConfig, BNEModel, GuidanceKernel, consensus_gap, objective,
                       subject_gradient, subject_objective, tbne_embed_predict, tbne_fit,
                       update_B, update_P, update_U, update_W)
from mvkit.dataio import synth_planted_tensor
from mvkit.errors import InvalidArgument, StateError
from mvkit.numkit import feasibility, laplacian, ridge_solve
from mvkit.tensor import cp_reconstruct, khatri_rao, mode_k_matricize


def random_problem(seed, m=4, n=6, k=2):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, m, n))
    X = 0.5 * (A + A.transpose(1, 0, 2))
    B, P, U = (rng.standard_normal((m, k)) for _ in range(3))
    S = np.linalg.qr(rng.standard_normal((n, k)))[0]
    return rng, X, B, P, U, S


def fd_grad(f, Z, h=1e-6):
    g = np.zeros_like(Z)
    for idx in np.ndindex(Z.shape):
        Zp, Zm = Z.copy(), Z.copy()
        Zp[idx] += h
        Zm[idx] -= h
        g[idx] = (f(Zp) - f(Zm)) / (2 * h)
    return g


class TestObjective:
    def _model(self, B, S, W):
        return BNEModel(B=B, P=B, S=S, W=W, U=np.zeros_like(B), mu=1.0, labeled=np.arange(0))

    def test_exact_factorization(self):
        _, _, B, _, _, S = random_problem(0)
        X = cp_reconstruct(B, B, S)
        cfg = BNEConfig(k=2, alpha=0.0, beta=0.0, gamma=0.0)
        val = objective(self._model(B, S, np.zeros((2, 1))), X, np.zeros((6, 6)), [], None, cfg)
        assert abs(val) <= 1e-10

    def test_zero_factors(self):
        _, X, _, _, _, _ = random_problem(1)
        model = self._model(np.zeros((4, 2)), np.zeros((6, 2)), np.zeros((2, 1)))
        val = objective(model, X, np.zeros((6, 6)), [], None, BNEConfig(k=2))
        np.testing.assert_allclose(val, np.sum(X ** 2))

    def test_term_by_term(self):
        rng, X, B, _, _, S = random_problem(2)
        Zs = rng.standard_normal((6, 2))
        LZ = laplacian(Zs @ Zs.T)
        W, Y, D = rng.standard_normal((2, 1)), rng.standard_normal((3, 1)), np.array([0, 2, 5])
        cfg = BNEConfig(k=2, alpha=0.3, beta=0.7, gamma=0.2)
        Xhat = np.zeros_like(X)
        for i, j, s in np.ndindex(X.shape):
            Xhat[i, j, s] = sum(B[i, r] * B[j, r] * S[s, r] for r in range(2))
        guide = sum(LZ[a, b] * S[a] @ S[b] for a in range(6) for b in range(6))
        expected = (np.sum((X - Xhat) ** 2) + 0.3 * guide + 0.2 * np.sum(W ** 2)
                    + 0.7 * np.sum((S[D] @ W - Y) ** 2))
        val = objective(self._model(B, S, W), X, LZ, D, Y, cfg)
        np.testing.assert_allclose(val, expected, rtol=1e-12)


class TestNodeUpdates:
    def test_scalar_hand_case(self):
        B = update_B(np.full((1, 1, 1), 6.0), [[2.0]], [[3.0]], np.zeros((1, 1)), 2.0)
        np.testing.assert_allclose(B[0, 0], 78.0 / 74.0, rtol=1e-12)

    def test_penalty_dominance(self):
        _, X, _, P, _, S = random_problem(3)
        gaps = [np.linalg.norm(update_B(X, S, P, np.zeros_like(P), mu) - P)
                for mu in (1.0, 1e2, 1e4, 1e6)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-4

    def test_p_is_mirror_of_b(self):
        _, X, B, _, U, S = random_problem(4)
        np.testing.assert_allclose(update_P(X, S, B, U, 1.5), update_B(X, S, B, -U, 1.5),
                                   rtol=1e-12, atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31), st.floats(0.1, 10.0))
    def test_b_stationarity(self, seed, mu):
        _, X, _, P, U, S = random_problem(seed)
        X1, E = mode_k_matricize(X, 1), khatri_rao(S, P)

        def lag(B):
            return (np.sum((X1 - B @ E.T) ** 2) + np.sum(U * (P - B))
                    + 0.5 * mu * np.sum((P - B) ** 2))

        g = fd_grad(lag, update_B(X, S, P, U, mu))
        scale = np.linalg.norm(2 * X1 @ E) + mu * np.linalg.norm(P) + np.linalg.norm(U)
        assert np.linalg.norm(g) / scale <= 1e-6

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31), st.floats(0.1, 10.0))
    def test_p_stationarity(self, seed, mu):
        _, X, B, _, U, S = random_problem(seed)
        X2, F = mode_k_matricize(X, 2), khatri_rao(S, B)

        def lag(P):
            return (np.sum((X2 - P @ F.T) ** 2) + np.sum(U * (P - B))
                    + 0.5 * mu * np.sum((P - B) ** 2))

        g = fd_grad(lag, update_P(X, S, B, U, mu))
        scale = np.linalg.norm(2 * X2 @ F) + mu * np.linalg.norm(B) + np.linalg.norm(U)
        assert np.linalg.norm(g) / scale <= 1e-6

    def test_nonpositive_mu(self):
        _, X, B, P, U, S = random_problem(5)
        with pytest.raises(InvalidArgument):
            update_B(X, S, P, U, 0.0)


class TestMultiplierUpdate:
    def test_consensus_leaves_u(self):
        U = np.arange(4.0).reshape(2, 2)
        np.testing.assert_array_equal(update_U(U, np.ones((2, 2)), np.ones((2, 2)), 3.0), U)

    def test_hand_case(self):
        out = update_U(np.zeros((2, 2)), np.ones((2, 2)), np.zeros((2, 2)), 2.0)
        np.testing.assert_array_equal(out, 2.0)

    def test_additive(self):
        rng = np.random.default_rng(0)
        U, P, B = (rng.standard_normal((3, 2)) for _ in range(3))
        twice = update_U(update_U(U, P, B, 0.5), P, B, 0.7)
        np.testing.assert_allclose(twice, U + 1.2 * (P - B))


class TestSubjectGradient:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31))
    def test_matches_finite_differences(self, seed):
        rng, X, B, P, _, S = random_problem(seed)
        Zs = rng.standard_normal((6, 2))
        LZ = laplacian(Zs @ Zs.T)
        D, W, Y = np.array([1, 3, 4]), rng.standard_normal((2, 2)), rng.standard_normal((3, 2))
        G, X3 = khatri_rao(P, B), mode_k_matricize(X, 3)
        g = subject_gradient(S, X, G, LZ, D, W, Y, 0.4, 0.6)
        fd = fd_grad(lambda T: 0.5 * subject_objective(T, X3, G, LZ, D, W, Y, 0.4, 0.6), S)
        assert np.linalg.norm(g - fd) / np.linalg.norm(fd) <= 1e-6

    def test_selector_matrix_equals_index_array(self):
        rng, X, B, P, _, S = random_problem(1)
        D = np.array([0, 5])
        Dmat = np.eye(6)[D]
        W, Y = rng.standard_normal((2, 1)), rng.standard_normal((2, 1))
        G, LZ = khatri_rao(P, B), np.zeros((6, 6))
        np.testing.assert_allclose(subject_gradient(S, X, G, LZ, D, W, Y, 0.0, 1.0),
                                   subject_gradient(S, X, G, LZ, Dmat, W, Y, 0.0, 1.0))

    def test_all_zero(self):
        g = subject_gradient(np.zeros((6, 2)), np.zeros((4, 4, 6)), np.ones((16, 2)),
                             np.zeros((6, 6)), [], np.zeros((2, 1)), None, 0.0, 0.0)
        np.testing.assert_array_equal(g, 0.0)

    def test_label_term_vanishes_with_zero_w(self):
        rng, X, B, P, _, S = random_problem(2)
        G, LZ = khatri_rao(P, B), np.zeros((6, 6))
        Y = rng.standard_normal((2, 1))
        W = np.zeros((2, 1))
        g1 = subject_gradient(S, X, G, LZ, [0, 1], W, Y, 0.0, 5.0)
        g0 = subject_gradient(S, X, G, LZ, [0, 1], W, Y, 0.0, 0.0)
        np.testing.assert_allclose(g1, g0)


class TestClassifierUpdate:
    def test_hand_case(self):
        np.testing.assert_allclose(update_W(np.eye(2), [0, 1], [[1.0], [0.0]], 1.0),
                                   [[0.5], [0.0]])

    def test_zero_targets(self):
        S = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 2)))[0]
        np.testing.assert_array_equal(update_W(S, [0, 1, 2], np.zeros((3, 1)), 0.25), 0.0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31), st.floats(0.01, 5.0))
    def test_stationarity(self, seed, gamma):
        rng, _, _, _, _, S = random_problem(seed)
        D, Y = np.array([0, 2, 3, 5]), rng.standard_normal((4, 2))
        W = update_W(S, D, Y, gamma)
        g = fd_grad(lambda V: np.sum((S[D] @ V - Y) ** 2) + gamma * np.sum(V ** 2), W)
        assert np.linalg.norm(g) / (2 * np.linalg.norm(S[D].T @ Y)) <= 1e-6

    def test_requires_positive_gamma(self):
        with pytest.raises(InvalidArgument):
            update_W(np.eye(2), [0, 1], np.ones((2, 1)), 0.0)


class TestFit:
    def test_planted_recovery(self):
        pt = synth_planted_tensor(1000, m=8, n=12, k=3)
        model = tbne_fit(pt.X, cfg=BNEConfig(k=3, alpha=0.0, beta=0.0, tol=1e-12, seed=0))
        err = np.linalg.norm(pt.X - model.reconstruct()) / np.linalg.norm(pt.X)
        assert err <= 1e-3
        assert feasibility(model.S) <= 1e-6

    def test_rank_one(self):
        pt = synth_planted_tensor(7, m=6, n=8, k=1)
        model = tbne_fit(pt.X, cfg=BNEConfig(k=1, alpha=0.0, beta=0.0, tol=1e-14, seed=0))
        err = np.linalg.norm(pt.X - model.reconstruct()) / np.linalg.norm(pt.X)
        assert err <= 1e-6

    def test_labeled_held_out_accuracy(self):
        accs = []
        for seed in range(5):
            pt = synth_planted_tensor(seed, m=8, n=40, k=3)
            lab = np.arange(30)
            cfg = BNEConfig(k=3, alpha=0.1, beta=0.1, gamma=0.25, seed=seed)
            model = tbne_fit(pt.X, GuidanceKernel.from_features(pt.Z), pt.y[lab], cfg)
            _, pred = tbne_embed_predict(model, np.arange(30, 40))
            accs.append(np.mean(pred == pt.y[30:]))
        assert np.mean(accs) >= 0.9

    def test_deterministic(self):
        pt = synth_planted_tensor(3, m=5, n=8, k=2)
        cfg = BNEConfig(k=2, max_iter=30)
        a, b = tbne_fit(pt.X, cfg=cfg), tbne_fit(pt.X, cfg=cfg)
        np.testing.assert_array_equal(a.S, b.S)
        np.testing.assert_array_equal(a.B, b.B)

    def test_iteration_cap_reports_not_converged(self):
        pt = synth_planted_tensor(3, m=5, n=8, k=2)
        model = tbne_fit(pt.X, cfg=BNEConfig(k=2, max_iter=2))
        assert not model.converged and model.n_iter == 2
        assert feasibility(model.S) <= 1e-6

    def test_consensus(self):
        pt = synth_planted_tensor(4, m=6, n=10, k=2)
        model = tbne_fit(pt.X, cfg=BNEConfig(k=2, alpha=0.0, beta=0.0))
        assert model.converged and consensus_gap(model) <= 1e-3

    def test_rank_exceeds_subjects(self):
        with pytest.raises(InvalidArgument):
            tbne_fit(np.ones((3, 3, 2)), cfg=BNEConfig(k=3))

    def test_label_index_mismatch(self):
        with pytest.raises(InvalidArgument):
            tbne_fit(np.ones((3, 3, 4)), Y=np.ones((2, 1)), labeled=[0], cfg=BNEConfig(k=2))

    def test_reconstruction_is_symmetric(self):
        pt = synth_planted_tensor(5, m=5, n=7, k=2)
        model = tbne_fit(pt.X, cfg=BNEConfig(k=2, max_iter=20))
        R = model.reconstruct()
        np.testing.assert_array_equal(R, R.transpose(1, 0, 2))


class TestEmbedPredict:
    def _model(self, S, W):
        return BNEModel(B=np.zeros((2, S.shape[1])), P=np.zeros((2, S.shape[1])), S=S, W=W,
                        U=np.zeros((2, S.shape[1])), mu=1.0, labeled=np.arange(0))

    def test_zero_w(self):
        scores, pred = tbne_embed_predict(self._model(np.eye(3)[:, :2], np.zeros((2, 3))))
        np.testing.assert_array_equal(scores, 0.0)
        np.testing.assert_array_equal(pred, 0)
        _, pred = tbne_embed_predict(self._model(np.eye(3)[:, :2], np.zeros((2, 1))))
        np.testing.assert_array_equal(pred, 1)

    def test_one_hot_row_copies_w(self):
        W = np.array([[1.0, 2.0], [3.0, 4.0]])
        scores, _ = tbne_embed_predict(self._model(np.eye(3)[:, :2], W), [1])
        np.testing.assert_array_equal(scores[0], W[1])

    def test_matches_external_ridge(self):
        rng = np.random.default_rng(0)
        S = np.linalg.qr(rng.standard_normal((10, 3)))[0]
        Y = rng.standard_normal((6, 2))
        W = update_W(S, np.arange(6), Y, 0.25)
        scores, _ = tbne_embed_predict(self._model(S, W), np.arange(6, 10))
        np.testing.assert_allclose(scores, S[6:] @ ridge_solve(S[:6], Y, 0.25), rtol=1e-12)

    def test_unfitted(self):
        with pytest.raises(StateError):
            tbne_embed_predict(None)
