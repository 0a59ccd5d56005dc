"""Tests for tensor-based multi-view feature selection."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvkit.dataio import synth_multiview
from mvkit.errors import DegenerateInput, InvalidArgument
from mvkit.mvfs import (KernelSpec, MultiViewDataset, SelectionState, cross_view_constants,
                        mv_decision, predict, rank_kernel, rank_linear, scale_view,
                        tmvfs_select, view_weights)
from mvkit.numkit import svm_train


class TestScaleView:
    def test_unit_constants(self):
        X = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(scale_view(X, np.ones(3), 1.0), X)

    def test_cancelling_constants(self):
        X = np.arange(4.0).reshape(2, 2)
        np.testing.assert_array_equal(scale_view(X, [2.0, 2.0], 4.0), X)

    def test_zero_q(self):
        np.testing.assert_array_equal(scale_view(np.ones((2, 3)), np.zeros(3), 2.0), 0.0)

    def test_nonpositive_p(self):
        with pytest.raises(InvalidArgument):
            scale_view(np.ones((2, 2)), np.ones(2), 0.0)


class TestCrossViewConstants:
    def test_single_other_view(self):
        views = [np.ones((3, 4)), np.ones((1, 4))]
        P, Q = cross_view_constants([np.ones(3), np.array([2.0])], views, 0)
        assert P == 4.0
        np.testing.assert_array_equal(Q, 2.0)

    def test_unit_weights(self):
        w = np.array([1.0, 0.0])
        views = [np.array([[1.0, 1.0], [5.0, -3.0]])] * 3
        P, Q = cross_view_constants([w, w, w], views, 0)
        assert P == 1.0
        np.testing.assert_array_equal(Q, 1.0)

    def test_orthogonal_factor_zeroes_q(self):
        views = [np.ones((2, 2)), np.array([[1.0, 1.0], [0.0, 1.0]]), np.ones((1, 2))]
        weights = [np.ones(2), np.array([0.0, 1.0]), np.ones(1)]
        _, Q = cross_view_constants(weights, views, 0)
        assert Q[0] == 0.0 and Q[1] == 1.0

    def test_zero_weight_is_degenerate(self):
        with pytest.raises(DegenerateInput):
            cross_view_constants([np.ones(2), np.zeros(2)], [np.ones((2, 3))] * 2, 0)


class TestViewWeights:
    def test_zero_duals(self):
        np.testing.assert_array_equal(view_weights(np.zeros(3), np.ones(3), np.ones(3), 1.0,
                                                   np.ones((2, 3))), 0.0)

    def test_single_support_vector(self):
        w = view_weights([1.0], [1.0], [2.0], 4.0, np.array([[1.0], [0.0]]))
        np.testing.assert_allclose(w, [0.5, 0.0])

    def test_matches_scaled_primal(self):
        ds = synth_multiview(3, n=30, dims=(4, 3))
        weights = [np.full(4, 0.5), np.full(3, 1 / np.sqrt(3))]
        P, Q = cross_view_constants(weights, ds.views, 0)
        Xs = scale_view(ds.views[0], Q, P)
        sol = svm_train(Xs.T, ds.y, 1.0)
        w = view_weights(sol.alphas, ds.y, Q, P, ds.views[0])
        np.testing.assert_allclose(np.sqrt(P) * w, sol.w, atol=1e-6)


class TestRanking:
    def test_squares(self):
        r = rank_linear([3.0, -2.0])
        np.testing.assert_array_equal(r, [9.0, 4.0])
        assert np.argsort(r, kind="stable")[0] == 1

    def test_tie_eliminates_first_index(self):
        assert np.argsort(rank_linear([0.0, 0.0]), kind="stable")[0] == 0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 31), st.sampled_from([2, 3]))
    def test_dense_tensor_order(self, seed, m):
        rng = np.random.default_rng(seed)
        ws = [rng.standard_normal(int(d)) for d in rng.integers(2, 6, size=m)]
        W = ws[0]
        for w in ws[1:]:
            W = np.multiply.outer(W, w)
        for v in range(m):
            dense = np.sum(W ** 2, axis=tuple(j for j in range(m) if j != v))
            np.testing.assert_array_equal(np.argsort(dense, kind="stable"),
                                          np.argsort(rank_linear(ws[v]), kind="stable"))

    def test_linear_kernel_order_matches_weights(self):
        rng = np.random.default_rng(0)
        Xs = rng.standard_normal((5, 12))
        y = np.where(rng.random(12) < 0.5, 1.0, -1.0)
        y[:2] = [1, -1]
        sol = svm_train(Xs.T, y, 1.0)
        r_kernel = rank_kernel(sol.alphas, y, Xs, KernelSpec("linear"))
        np.testing.assert_array_equal(np.argsort(r_kernel, kind="stable"),
                                      np.argsort(rank_linear(sol.w), kind="stable"))

    def test_rbf_constant_feature_scores_zero(self):
        rng = np.random.default_rng(1)
        Xs = rng.random((4, 10))
        Xs[2] = 0.7
        y = np.array([1.0, -1.0] * 5)
        r = rank_kernel(rng.random(10), y, Xs, KernelSpec("rbf"))
        np.testing.assert_allclose(r[2], 0.0, atol=1e-12)

    def test_rbf_duplicated_feature_scores_equal(self):
        rng = np.random.default_rng(2)
        Xs = rng.random((4, 10))
        Xs[3] = Xs[1]
        y = np.array([1.0, -1.0] * 5)
        r = rank_kernel(rng.random(10), y, Xs, KernelSpec("rbf"))
        np.testing.assert_allclose(r[1], r[3], rtol=1e-12)


class TestTmvfsSelect:
    def test_full_targets_do_not_eliminate(self):
        ds = synth_multiview(0, n=20, dims=(3, 2))
        st_ = tmvfs_select(ds, [3, 2])
        assert st_.rounds == 0
        assert all(e == [] for e in st_.eliminated)
        np.testing.assert_array_equal(st_.selected[0], [0, 1, 2])

    def test_targets_are_met(self):
        ds = synth_multiview(1, n=30, dims=(6, 5))
        st_ = tmvfs_select(ds, [2, 3])
        assert [len(s) for s in st_.selected] == [2, 3]
        assert [len(w) for w in st_.weights] == [2, 3]
        assert sorted(st_.eliminated[0] + list(st_.selected[0])) == list(range(6))

    def test_planted_feature_kept(self):
        st_ = tmvfs_select(synth_multiview(4), [1, 1])
        assert st_.selected[0][0] == 0 and st_.selected[1][0] == 0

    def test_feature_permutation_equivariance(self):
        ds = synth_multiview(5, n=40, dims=(5, 4))
        perm = np.array([3, 0, 4, 2, 1])
        permuted = MultiViewDataset([ds.views[0][perm], ds.views[1]], ds.y)
        a = tmvfs_select(ds, [2, 2])
        b = tmvfs_select(permuted, [2, 2])
        np.testing.assert_array_equal(np.sort(perm[b.selected[0]]), np.sort(a.selected[0]))
        np.testing.assert_array_equal(b.selected[1], a.selected[1])

    def test_kernel_variant_runs(self):
        st_ = tmvfs_select(synth_multiview(6, n=30, dims=(4, 4)), [2, 2], spec=KernelSpec("rbf"))
        assert [len(s) for s in st_.selected] == [2, 2]

    @pytest.mark.parametrize("targets", [[0, 1], [11, 1], [1]])
    def test_bad_targets(self, targets):
        with pytest.raises(InvalidArgument):
            tmvfs_select(synth_multiview(0), targets)

    def test_single_class_rejected(self):
        ds = synth_multiview(0, n=10, dims=(2, 2))
        ds.y[:] = 1.0
        with pytest.raises(InvalidArgument):
            tmvfs_select(ds, [1, 1])

    def test_one_feature_per_elimination_step(self):
        ds = synth_multiview(8, n=30, dims=(6, 4))
        st_ = tmvfs_select(ds, [2, 1])
        assert [len(e) for e in st_.eliminated] == [4, 3]
        assert len(set(st_.eliminated[0])) == 4

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2 ** 31), st.sampled_from([0.5, 2.0, 3.0]))
    def test_view_scaling_with_rescaled_c(self, seed, gamma):
        ds = synth_multiview(seed % 1000, n=40, dims=(6, 5))
        a = tmvfs_select(ds, [3, 3], C=1.0)
        scaled = MultiViewDataset([ds.views[0] * gamma, ds.views[1]], ds.y)
        b = tmvfs_select(scaled, [3, 3], C=1.0 / gamma ** 2)
        assert a.eliminated == b.eliminated


class TestDecision:
    def _state(self, weights, b):
        return SelectionState(selected=[np.arange(len(w)) for w in weights],
                              weights=[np.asarray(w, float) for w in weights], b=b,
                              targets=[len(w) for w in weights])

    def test_hand_case(self):
        assert mv_decision(self._state([[1.0], [2.0]], -5.0), [[3.0], [1.0]]) == 1

    def test_zero_weight_gives_sign_of_bias(self):
        assert mv_decision(self._state([[0.0], [2.0]], -0.5), [[3.0], [1.0]]) == -1
        assert mv_decision(self._state([[0.0], [2.0]], 0.5), [[3.0], [1.0]]) == 1

    def test_negating_view_is_invariant(self):
        rng = np.random.default_rng(0)
        w = [rng.standard_normal(3), rng.standard_normal(2)]
        x = [rng.standard_normal(3), rng.standard_normal(2)]
        a = mv_decision(self._state(w, 0.1), x)
        b = mv_decision(self._state([-w[0], w[1]], 0.1), [-x[0], x[1]])
        assert a == b

    def test_vectorized_matches_scalar(self):
        ds = synth_multiview(7, n=25, dims=(4, 3))
        st_ = tmvfs_select(ds, [2, 2])
        pred = predict(st_, ds.views)
        for i in range(ds.n):
            x = [X[s, i] for X, s in zip(ds.views, st_.selected)]
            assert pred[i] == mv_decision(st_, x)

    def test_wrong_width(self):
        with pytest.raises(InvalidArgument):
            mv_decision(self._state([[1.0], [2.0]], 0.0), [[1.0, 2.0], [1.0]])
