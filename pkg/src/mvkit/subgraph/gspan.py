"""gSpan enumeration of connected frequent subgraphs.

A pattern is identified by its minimum DFS code, a sequence of extended edges
``(i, j, label_i, edge_label, label_j)`` over DFS discovery indices. Patterns
grow by rightmost-path extension; a child is explored only if its code is
minimal, so every frequent connected pattern is visited exactly once, in
lexicographic (pre-order) DFS-code order.
"""
from collections import defaultdict
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import InvalidArgument
from .graph import LabeledGraph

DFSEdge = Tuple[int, int, int, int, int]


class DFSCode(tuple):
    """Immutable sequence of DFS edges."""

    @property
    def n_vertices(self):
        return 1 + max(max(e[0], e[1]) for e in self) if self else 0

    def to_graph(self):
        labels = {}
        edges = {}
        for i, j, li, le, lj in self:
            labels[i] = li
            labels[j] = lj
            edges[(min(i, j), max(i, j))] = le
        return LabeledGraph([labels[v] for v in range(len(labels))], edges)

    def rightmost_path(self):
        """Vertex indices on the rightmost path, from the rightmost vertex to the root."""
        path = []
        for i, j, *_ in reversed(self):
            if i < j and (not path or j == path[-1]):
                if not path:
                    path.append(j)
                path.append(i)
        return path

    def to_list(self):
        return [list(e) for e in self]


class Embedding(NamedTuple):
    gid: int
    vmap: tuple      # DFS index -> graph vertex
    used: frozenset  # graph edges (u, v), u < v, already matched


def _key(i, j):
    return (i, j) if i < j else (j, i)


def _extensions(code, rmpath, emb, graph):
    """Candidate child edges ``(dfs_edge, new_embedding)`` of one embedding."""
    vmap = emb.vmap
    labels = graph.node_labels
    adj = graph.adjacency
    nxt = len(vmap)
    right = rmpath[0]
    ru = vmap[right]
    inverse = {g: d for d, g in enumerate(vmap)}
    out = []
    # backward edges from the rightmost vertex to the rightmost path
    for v in rmpath[1:]:
        gv = vmap[v]
        for w, le in adj[ru]:
            if w == gv and _key(ru, gv) not in emb.used:
                out.append(((right, v, labels[ru], le, labels[gv]),
                            Embedding(emb.gid, vmap, emb.used | {_key(ru, gv)})))
    # forward edges from rightmost-path vertices to unmatched vertices
    for v in rmpath:
        gv = vmap[v]
        for w, le in adj[gv]:
            if w in inverse:
                continue
            out.append(((v, nxt, labels[gv], le, labels[w]),
                        Embedding(emb.gid, vmap + (w,), emb.used | {_key(gv, w)})))
    return out


def child_order(edge):
    """Sort key of sibling extensions that reproduces DFS lexicographic order."""
    i, j, li, le, lj = edge
    if j < i:
        return (0, j, le, 0)
    return (1, -i, le, lj)


def _min_first_edge(graph):
    best = None
    for (u, v), le in graph.edges.items():
        for a, b in ((u, v), (v, u)):
            t = (graph.node_labels[a], le, graph.node_labels[b])
            if best is None or t < best:
                best = t
    return best


def is_min(code):
    """True when ``code`` is the minimum DFS code of the graph it encodes."""
    code = DFSCode(code)
    if not code:
        return True
    g = code.to_graph()
    first = _min_first_edge(g)
    if code[0][2:] != first:
        return False
    embs = []
    for (u, v), le in g.edges.items():
        for a, b in ((u, v), (v, u)):
            if (g.node_labels[a], le, g.node_labels[b]) == first:
                embs.append(Embedding(0, (a, b), frozenset({_key(a, b)})))
    for k in range(1, len(code)):
        prefix = DFSCode(code[:k])
        rmpath = prefix.rightmost_path()
        best = None
        best_embs = []
        for emb in embs:
            for edge, new in _extensions(prefix, rmpath, emb, g):
                key = child_order(edge)
                if best is None or key < best[0]:
                    best = (key, edge)
                    best_embs = [new]
                elif key == best[0]:
                    best_embs.append(new)
        if best is None or best[1] != tuple(code[k]):
            return False
        embs = best_embs
    return True


class EnumerationStats(NamedTuple):
    visited: int
    pruned: int


def gspan_enumerate(graphs: List[LabeledGraph], min_sup: int, max_edges: int,
                    visit: Callable[[DFSCode, np.ndarray], Optional[bool]]):
    """Depth-first enumeration of frequent connected patterns.

    ``visit(code, f)`` receives the minimum DFS code and the 0/1 support
    indicator over ``graphs``. Returning ``False`` stops the search below that
    pattern; any other value continues. Returns :class:`EnumerationStats`.
    """
    if min_sup < 1:
        raise InvalidArgument("min_sup must be at least 1")
    if max_edges < 1:
        raise InvalidArgument("max_edges must be at least 1")
    n = len(graphs)
    counters = {"visited": 0, "pruned": 0}

    def indicator(embs):
        f = np.zeros(n, dtype=np.int8)
        f[[e.gid for e in embs]] = 1
        return f

    def grow(code, embs):
        f = indicator(embs)
        counters["visited"] += 1
        if visit(code, f) is False:
            counters["pruned"] += 1
            return
        if len(code) >= max_edges:
            return
        rmpath = code.rightmost_path()
        children = defaultdict(list)
        for emb in embs:
            for edge, new in _extensions(code, rmpath, emb, graphs[emb.gid]):
                children[edge].append(new)
        for edge in sorted(children, key=child_order):
            group = children[edge]
            if len({e.gid for e in group}) < min_sup:
                continue
            child = DFSCode(code + (edge,))
            if not is_min(child):
                continue
            grow(child, group)

    roots = defaultdict(list)
    for gid, g in enumerate(graphs):
        for (u, v), le in g.edges.items():
            for a, b in ((u, v), (v, u)):
                la, lb = g.node_labels[a], g.node_labels[b]
                if la <= lb:
                    roots[(0, 1, la, le, lb)].append(
                        Embedding(gid, (a, b), frozenset({(u, v)})))
    for edge in sorted(roots, key=lambda e: (e[2], e[3], e[4])):
        group = roots[edge]
        if len({e.gid for e in group}) >= min_sup:
            grow(DFSCode((edge,)), group)
    return EnumerationStats(visited=counters["visited"], pruned=counters["pruned"])


def min_dfs_code(graph):
    """Minimum DFS code of a connected graph with at least one edge."""
    first = _min_first_edge(graph)
    if first is None:
        raise InvalidArgument("graph has no edges")
    embs = []
    for (u, v), le in graph.edges.items():
        for a, b in ((u, v), (v, u)):
            if (graph.node_labels[a], le, graph.node_labels[b]) == first:
                embs.append(Embedding(0, (a, b), frozenset({(u, v)})))
    code = DFSCode(((0, 1) + first,))
    while len(code) < len(graph.edges):
        rmpath = code.rightmost_path()
        best = None
        best_embs = []
        for emb in embs:
            for edge, new in _extensions(code, rmpath, emb, graph):
                key = child_order(edge)
                if best is None or key < best[0]:
                    best, best_embs = (key, edge), [new]
                elif key == best[0]:
                    best_embs.append(new)
        if best is None:
            raise InvalidArgument("graph is not connected")
        code = DFSCode(code + (best[1],))
        embs = best_embs
    return code
