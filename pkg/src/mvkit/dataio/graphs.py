import glob
import os

import numpy as np

from ..errors import InvalidArgument, ParseError
from ..subgraph.graph import GraphCorpus, LabeledGraph, SideViewSet
from ._csv import parse_float, read_matrix, require_dir, require_file, write_matrix


def _int(text, path, line):
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"not an integer: {text!r}", path, line) from None


def _finish(path, line, nodes, edges, out):
    labels = []
    for i in range(len(nodes)):
        if i not in nodes:
            raise ParseError(f"vertex ids must be 0..{len(nodes) - 1}", path, line)
        labels.append(nodes[i])
    try:
        out.append(LabeledGraph(labels, edges))
    except InvalidArgument as exc:
        raise ParseError(str(exc), path, line) from None


def load_graph_corpus(path, edge_threshold=None, sideview_dir=None):
    """Read a gSpan-style corpus and optional side views.

    Without ``edge_threshold`` the third field of an ``e`` line is an integer
    edge label. With a threshold in ``[0, 1]`` it is a weight: edges with
    weight at least the threshold are kept, unlabeled (label 0), the rest
    dropped. Side views are the ``*.csv`` files of ``sideview_dir`` (default
    ``<path>.sideviews`` if it exists), one row per graph in corpus order.
    """
    if edge_threshold is not None and not 0.0 <= edge_threshold <= 1.0:
        raise InvalidArgument("edge_threshold must lie in [0, 1]")
    require_file(path)
    graphs, ids, ys = [], [], []
    nodes, edges = None, None
    start_line = 0
    with open(path) as fh:
        lines = fh.read().splitlines()
    for ln, raw in enumerate(lines, start=1):
        parts = raw.split()
        if not parts or parts[0].startswith("%"):
            continue
        tag = parts[0]
        if tag == "t":
            if nodes is not None:
                _finish(path, start_line, nodes, edges, graphs)
                nodes = None
            if len(parts) >= 3 and parts[1] == "#" and parts[2] == "-1":
                break
            if len(parts) != 4 or parts[1] != "#":
                raise ParseError("expected 't # <id> <label|?>'", path, ln)
            ids.append(parts[2])
            lab = parts[3]
            if lab == "?":
                ys.append(0.0)
            elif lab in ("1", "+1", "-1"):
                ys.append(float(lab))
            else:
                raise ParseError(f"graph label must be 1, -1 or ?, got {lab!r}", path, ln)
            nodes, edges, start_line = {}, {}, ln
        elif tag == "v":
            if nodes is None or len(parts) != 3:
                raise ParseError("expected 'v <idx> <label>' after a 't' line", path, ln)
            idx = _int(parts[1], path, ln)
            if idx in nodes:
                raise ParseError(f"duplicate vertex {idx}", path, ln)
            nodes[idx] = _int(parts[2], path, ln)
        elif tag == "e":
            if nodes is None or len(parts) != 4:
                raise ParseError("expected 'e <i> <j> <label>' after a 't' line", path, ln)
            i, j = _int(parts[1], path, ln), _int(parts[2], path, ln)
            if i not in nodes or j not in nodes:
                raise ParseError(f"edge ({i}, {j}) references an undeclared vertex", path, ln)
            if i == j:
                raise ParseError(f"self-loop on vertex {i}", path, ln)
            key = (min(i, j), max(i, j))
            if key in edges:
                raise ParseError(f"duplicate edge {key}", path, ln)
            if edge_threshold is None:
                edges[key] = _int(parts[3], path, ln)
            elif parse_float(parts[3], path, ln) >= edge_threshold:
                edges[key] = 0
        else:
            raise ParseError(f"unknown record type {tag!r}", path, ln)
    if nodes is not None:
        _finish(path, start_line, nodes, edges, graphs)
    corpus = GraphCorpus(graphs, np.array(ys), ids)

    if sideview_dir is None and os.path.isdir(path + ".sideviews"):
        sideview_dir = path + ".sideviews"
    sides = None
    if sideview_dir is not None:
        require_dir(sideview_dir)
        files = sorted(glob.glob(os.path.join(sideview_dir, "*.csv")))
        views, names = [], []
        for f in files:
            _, Z = read_matrix(f)
            if Z.shape[0] != corpus.n:
                raise InvalidArgument(f"{f} has {Z.shape[0]} rows for {corpus.n} graphs")
            if Z.shape[1] == 0:
                raise InvalidArgument(f"{f} has no features")
            views.append(Z)
            names.append(os.path.splitext(os.path.basename(f))[0])
        sides = SideViewSet(views, names=names) if views else None
    return corpus, sides


def write_graph_corpus(corpus, path, sideviews=None):
    with open(path, "w") as fh:
        for gid, g, y in zip(corpus.ids, corpus.graphs, corpus.y):
            lab = "?" if y == 0 else ("1" if y > 0 else "-1")
            fh.write(f"t # {gid} {lab}\n")
            for i, l in enumerate(g.node_labels):
                fh.write(f"v {i} {l}\n")
            for (i, j), l in g.edges.items():
                fh.write(f"e {i} {j} {l}\n")
    if sideviews is not None:
        d = path + ".sideviews"
        os.makedirs(d, exist_ok=True)
        for name, Z in zip(sideviews.names, sideviews.views):
            write_matrix(os.path.join(d, f"{name}.csv"), Z,
                         [f"z{i + 1}" for i in range(Z.shape[1])])
