from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms import isomorphism

from ..errors import InvalidArgument
from ..numkit.kernels import KernelSpec


@dataclass
class LabeledGraph:
    """Undirected graph with integer node labels and discrete edge labels.

    ``edges`` maps ``(i, j)`` with ``i < j`` to the edge label.
    """

    node_labels: List[int]
    edges: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        self.node_labels = [int(l) for l in self.node_labels]
        norm = {}
        for (i, j), lab in dict(self.edges).items():
            i, j = int(i), int(j)
            if i == j:
                raise InvalidArgument(f"self-loop on node {i}")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise InvalidArgument(f"edge ({i}, {j}) references a missing node")
            key = (min(i, j), max(i, j))
            if key in norm:
                raise InvalidArgument(f"duplicate edge {key}")
            norm[key] = int(lab)
        self.edges = dict(sorted(norm.items()))
        self._adj = None

    @classmethod
    def from_edge_list(cls, node_labels, edge_list):
        """``edge_list`` holds ``(i, j)`` or ``(i, j, label)`` tuples."""
        edges = {}
        for e in edge_list:
            i, j = int(e[0]), int(e[1])
            key = (min(i, j), max(i, j))
            if key in edges:
                raise InvalidArgument(f"duplicate edge {key}")
            edges[key] = int(e[2]) if len(e) > 2 else 0
        return cls(list(node_labels), edges)

    @property
    def n_nodes(self):
        return len(self.node_labels)

    @property
    def adjacency(self):
        """``adjacency[u]`` is a sorted list of ``(neighbor, edge_label)``."""
        if self._adj is None:
            adj = [[] for _ in range(self.n_nodes)]
            for (i, j), lab in self.edges.items():
                adj[i].append((j, lab))
                adj[j].append((i, lab))
            self._adj = [sorted(a) for a in adj]
        return self._adj

    def to_networkx(self):
        g = nx.Graph()
        for i, lab in enumerate(self.node_labels):
            g.add_node(i, label=lab)
        for (i, j), lab in self.edges.items():
            g.add_edge(i, j, label=lab)
        return g


def _label_match(a, b):
    return a["label"] == b["label"]


def contains(graph, pattern):
    """True when ``pattern`` is a (not necessarily induced) subgraph of ``graph``."""
    if pattern.n_nodes > graph.n_nodes or len(pattern.edges) > len(graph.edges):
        return False
    gm = isomorphism.GraphMatcher(graph.to_networkx(), pattern.to_networkx(),
                                  node_match=_label_match, edge_match=_label_match)
    return gm.subgraph_is_monomorphic()


@dataclass
class GraphCorpus:
    """Graphs with labels in ``{-1, +1}`` or ``0`` for unlabeled instances."""

    graphs: List[LabeledGraph]
    y: np.ndarray = None
    ids: Optional[List[str]] = None

    def __post_init__(self):
        n = len(self.graphs)
        self.y = np.zeros(n) if self.y is None else np.asarray(self.y, dtype=float).ravel()
        if self.y.size != n:
            raise InvalidArgument(f"{self.y.size} labels for {n} graphs")
        if not np.all(np.isin(self.y, (-1.0, 0.0, 1.0))):
            raise InvalidArgument("graph labels must be -1, +1 or 0 (unlabeled)")
        if self.ids is None:
            self.ids = [str(i) for i in range(n)]

    @property
    def n(self):
        return len(self.graphs)

    @property
    def n_labeled(self):
        return int(np.count_nonzero(self.y))


@dataclass
class SideViewSet:
    """Vector side views ``Z[p]`` (n x d_p) with nonnegative weights."""

    views: List[np.ndarray]
    lambdas: Optional[List[float]] = None
    kernel: KernelSpec = field(default_factory=KernelSpec)
    names: Optional[List[str]] = None

    def __post_init__(self):
        self.views = [np.asarray(Z, dtype=float) for Z in self.views]
        if self.lambdas is None:
            self.lambdas = [1.0] * len(self.views)
        self.lambdas = [float(l) for l in self.lambdas]
        if len(self.lambdas) != len(self.views):
            raise InvalidArgument("one lambda per side view is required")
        if any(l < 0 for l in self.lambdas):
            raise InvalidArgument("side view weights must be nonnegative")
        rows = {Z.shape[0] for Z in self.views}
        if len(rows) > 1:
            raise InvalidArgument("side views disagree on the number of instances")
        if self.names is None:
            self.names = [f"side{p + 1}" for p in range(len(self.views))]
