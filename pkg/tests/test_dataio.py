"""Tests for file loaders, writers, the model container and synthetic generators."""
import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvkit.dataio import (dichotomize_hdrs, load_graph_corpus, load_model, load_multiview,
                          load_network_stack, load_sessions, minmax_normalize, save_model,
                          synth_graph_corpus, synth_multiview, synth_planted_tensor,
                          synth_sessions, write_graph_corpus, write_multiview,
                          write_network_stack, write_sessions)
from mvkit.errors import InvalidArgument, ParseError
from mvkit.subgraph import contains
from mvkit.tensor import is_partially_symmetric

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


class TestMultiview:
    def test_round_trip(self, tmp_path):
        ds = synth_multiview(0, n=12, dims=(3, 2))
        write_multiview(ds, tmp_path)
        back = load_multiview(tmp_path, normalize=False)
        for a, b in zip(ds.views, back.views):
            np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(back.y, ds.y)
        assert back.feature_names == ds.feature_names

    def test_normalization(self):
        M = np.array([[1.0, 5.0], [3.0, 5.0], [2.0, 5.0]])
        np.testing.assert_array_equal(minmax_normalize(M), [[0, 0], [1, 0], [0.5, 0]])

    def test_loaded_views_are_normalized(self, tmp_path):
        ds = synth_multiview(1, n=10, dims=(2, 2))
        ds.views[0] = ds.views[0] * 7 - 3
        write_multiview(ds, tmp_path)
        back = load_multiview(tmp_path)
        assert back.views[0].min() == 0.0 and back.views[0].max() == 1.0

    def test_empty_view(self, tmp_path):
        write_multiview(synth_multiview(0, n=4, dims=(2, 2)), tmp_path)
        open(tmp_path / "view3.csv", "w").close()
        with pytest.raises(InvalidArgument):
            load_multiview(tmp_path)

    def test_bad_number_reports_line(self, tmp_path):
        write_multiview(synth_multiview(0, n=4, dims=(2, 2)), tmp_path)
        path = tmp_path / "view1.csv"
        lines = path.read_text().splitlines()
        lines[2] = "0.5,abc"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as info:
            load_multiview(tmp_path)
        assert info.value.line == 3

    def test_row_count_mismatch(self, tmp_path):
        write_multiview(synth_multiview(0, n=4, dims=(2, 2)), tmp_path)
        (tmp_path / "labels.csv").write_text("label\n1\n-1\n")
        with pytest.raises(InvalidArgument):
            load_multiview(tmp_path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(InvalidArgument, match="nowhere"):
            load_multiview(tmp_path / "nowhere")


class TestGraphCorpus:
    def test_hand_written_fixture(self):
        corpus, sides = load_graph_corpus(os.path.join(FIXTURES, "three_graphs.txt"))
        assert sides is None
        assert corpus.ids == ["g0", "g1", "g2"]
        np.testing.assert_array_equal(corpus.y, [1, -1, 0])
        assert corpus.graphs[0].edges == {(0, 1): 0, (1, 2): 1}
        assert corpus.graphs[1].edges == {(0, 1): 0}
        assert corpus.graphs[2].edges == {(0, 1): 0, (1, 2): 0, (0, 2): 0, (2, 3): 1}
        assert corpus.graphs[2].node_labels == [2, 2, 2, 1]

    def test_round_trip_with_side_views(self, tmp_path):
        corpus, sides, _ = synth_graph_corpus(0)
        path = str(tmp_path / "c.txt")
        write_graph_corpus(corpus, path, sides)
        back, back_sides = load_graph_corpus(path)
        assert [g.edges for g in back.graphs] == [g.edges for g in corpus.graphs]
        assert [g.node_labels for g in back.graphs] == [g.node_labels for g in corpus.graphs]
        np.testing.assert_array_equal(back.y, corpus.y)
        for a, b in zip(sides.views, back_sides.views):
            np.testing.assert_array_equal(a, b)

    def test_weight_threshold(self, tmp_path):
        path = tmp_path / "w.txt"
        path.write_text("t # a 1\nv 0 0\nv 1 0\nv 2 0\ne 0 1 0.8\ne 1 2 0.2\n")
        corpus, _ = load_graph_corpus(str(path), edge_threshold=0.5)
        assert corpus.graphs[0].edges == {(0, 1): 0}

    def test_threshold_out_of_range(self):
        with pytest.raises(InvalidArgument):
            load_graph_corpus(os.path.join(FIXTURES, "three_graphs.txt"), edge_threshold=1.5)

    @pytest.mark.parametrize("body,line", [
        ("t # a 1\nv 0 0\ne 0 1 0\n", 3),
        ("t # a 1\nv 0 x\n", 2),
        ("t # a 2\n", 1),
        ("v 0 0\n", 1),
        ("t # a 1\nv 0 0\nq 1\n", 3),
    ])
    def test_malformed_lines(self, tmp_path, body, line):
        path = tmp_path / "bad.txt"
        path.write_text(body)
        with pytest.raises(ParseError) as info:
            load_graph_corpus(str(path))
        assert info.value.line == line


class TestSessions:
    def test_round_trip(self, tmp_path):
        data = synth_sessions(0, n=6)
        path = str(tmp_path / "s.jsonl")
        write_sessions(data, path)
        back = load_sessions(path, min_len=1)
        assert [s.id for s in back] == [s.id for s in data]
        for a, b in zip(data, back):
            assert a.y == b.y
            for va, vb in zip(a.views, b.views):
                np.testing.assert_array_equal(va, vb)

    def test_length_filter_and_truncation(self, tmp_path):
        data = synth_sessions(1, n=4, lengths=(10, 12))
        path = str(tmp_path / "s.jsonl")
        write_sessions(data, path)
        assert load_sessions(path, min_len=12) == []
        for s in load_sessions(path, min_len=5, max_len=6):
            assert all(v.shape[0] == 6 for v in s.views)

    def test_hdrs_target(self, tmp_path):
        path = tmp_path / "h.jsonl"
        rows = [{"id": "a", "views": [[[0, 1.0], [1, 2.0]]], "hdrs": 7},
                {"id": "b", "views": [[[0, 1.0], [1, 2.0]]], "hdrs": 8}]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        assert [s.y for s in load_sessions(str(path), min_len=1, target="hdrs")] == [0.0, 1.0]

    def test_dichotomize(self):
        assert dichotomize_hdrs(0) == 0 and dichotomize_hdrs(7) == 0 and dichotomize_hdrs(8) == 1
        with pytest.raises(InvalidArgument):
            dichotomize_hdrs(-1)

    def test_out_of_order_timestamps(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(json.dumps({"views": [[[1, 0.0], [0, 1.0]]], "label": 0}) + "\n")
        with pytest.raises(ParseError, match="chronological"):
            load_sessions(str(path), min_len=1)

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "j.jsonl"
        path.write_text(json.dumps({"views": [[[0, 1.0]]], "label": 0}) + "\n{oops\n")
        with pytest.raises(ParseError) as info:
            load_sessions(str(path), min_len=1)
        assert info.value.line == 2


class TestNetworks:
    def test_round_trip(self, tmp_path):
        pt = synth_planted_tensor(0, m=4, n=5, k=2)
        y = np.array([1.0, -1.0, np.nan, 1.0, np.nan])
        write_network_stack(tmp_path, pt.X, pt.Z, y)
        X, Z, back_y = load_network_stack(tmp_path)
        np.testing.assert_array_equal(X, pt.X)
        np.testing.assert_array_equal(Z, pt.Z)
        np.testing.assert_array_equal(back_y, y)

    def test_asymmetric_network(self, tmp_path):
        write_network_stack(tmp_path, np.zeros((2, 2, 2)), np.zeros((2, 1)), np.ones(2))
        (tmp_path / "networks" / "s0.csv").write_text("0,1\n0,0\n")
        with pytest.raises(InvalidArgument):
            load_network_stack(tmp_path)


class TestModelFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        blocks = {"S": rng.standard_normal((4, 3)), "T": rng.standard_normal((2, 3, 2))}
        path = tmp_path / "m.bin"
        save_model(path, {"kind": "test"}, blocks)
        meta, back = load_model(path)
        assert meta == {"kind": "test"}
        for k in blocks:
            np.testing.assert_array_equal(back[k], blocks[k])

    def test_truncated(self, tmp_path):
        path = tmp_path / "m.bin"
        save_model(path, {}, {"a": np.ones(4)})
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(ParseError, match="truncated"):
            load_model(path)

    def test_trailing_bytes(self, tmp_path):
        path = tmp_path / "m.bin"
        save_model(path, {}, {"a": np.ones(2)})
        path.write_bytes(path.read_bytes() + b"\0")
        with pytest.raises(ParseError, match="trailing"):
            load_model(path)

    def test_not_a_model(self, tmp_path):
        path = tmp_path / "m.bin"
        path.write_bytes(b'{"format": "other"}\n')
        with pytest.raises(ParseError):
            load_model(path)


class TestSynthetic:
    def test_planted_tensor_has_rank_k(self):
        pt = synth_planted_tensor(0, m=6, n=9, k=2)
        assert is_partially_symmetric(pt.X)
        sv = np.linalg.svd(pt.X.reshape(-1, 9), compute_uv=False)
        assert np.sum(sv > 1e-10 * sv[0]) == 2

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31))
    def test_planted_subgraph_in_exactly_positive_graphs(self, seed):
        corpus, _, pattern = synth_graph_corpus(seed)
        hits = np.array([contains(g, pattern) for g in corpus.graphs])
        np.testing.assert_array_equal(hits, corpus.y > 0)

    @pytest.mark.parametrize("make", [
        lambda s: synth_multiview(s).views[0],
        lambda s: synth_planted_tensor(s).X,
        lambda s: np.concatenate([v.ravel() for x in synth_sessions(s) for v in x.views]),
        lambda s: np.concatenate([side.ravel() for side in synth_graph_corpus(s)[1].views]),
    ])
    def test_seed_determinism(self, make):
        assert make(5).tobytes() == make(5).tobytes()
        assert make(5).tobytes() != make(6).tobytes()

    def test_session_labels_follow_view_mean(self):
        for s in synth_sessions(2, n=20):
            assert (s.views[0].mean() > 0) == (s.y == 1.0)
