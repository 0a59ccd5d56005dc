"""Seeded synthetic datasets with known ground truth."""
from dataclasses import dataclass

import numpy as np

from ..deepmood.model import SessionInstance
from ..errors import InvalidArgument
from ..mvfs import MultiViewDataset
from ..subgraph.graph import GraphCorpus, LabeledGraph, SideViewSet
from ..tensor import cp_reconstruct

PLANTED_LABEL = 0  # node label reserved for the planted pattern


def synth_multiview(seed, n=50, dims=(10, 10), threshold=0.25):
    """Uniform ``[0, 1]`` views; ``y = sign(prod_v x_1^(v) - threshold)`` with ``sign(0) = +1``.

    Only the first feature of each view is informative.
    """
    if len(dims) < 2 or min(dims) < 1 or n < 2:
        raise InvalidArgument("need at least two nonempty views and two instances")
    rng = np.random.default_rng(seed)
    views = [rng.uniform(size=(d, n)) for d in dims]
    prod = np.prod([X[0] for X in views], axis=0)
    y = np.where(prod - threshold >= 0, 1.0, -1.0)
    return MultiViewDataset(views, y)


def synth_graph_corpus(seed, n=8, max_nodes=6, n_labels=3, planted_edges=3, p_edge=0.4,
                       side_dims=(3, 2), shift=1.0):
    """Graphs where every positive instance contains a planted path.

    The path has ``planted_edges`` edges on nodes carrying the reserved label
    0, which never occurs elsewhere, so the pattern appears in exactly the
    positive graphs. Background nodes use labels ``1..n_labels``. The first
    side view is shifted by ``shift * y``; the others are pure noise.

    Returns ``(corpus, sideviews, pattern)``.
    """
    k0 = planted_edges + 1
    if planted_edges < 1 or k0 >= max_nodes:
        raise InvalidArgument("planted path must leave room for at least one background node")
    if max_nodes < 3:
        raise InvalidArgument("max_nodes must be at least 3")
    rng = np.random.default_rng(seed)
    y = np.array([1.0, -1.0] * (n // 2) + [1.0] * (n % 2))
    rng.shuffle(y)
    graphs = []
    for yi in y:
        planted = yi > 0
        start = k0 if planted else 0
        nb = int(rng.integers(1 if planted else 3, max_nodes - start + 1))
        labels = [PLANTED_LABEL] * start + [int(l) for l in rng.integers(1, n_labels + 1, nb)]
        edges = {}
        if planted:
            for a in range(start - 1):
                edges[(a, a + 1)] = 0
        for i in range(len(labels)):
            for j in range(max(i + 1, start), len(labels)):
                if rng.random() < p_edge:
                    edges[(i, j)] = 0
        graphs.append(LabeledGraph(labels, edges))
    views = []
    for p, d in enumerate(side_dims):
        Z = rng.normal(size=(n, d))
        if p == 0:
            Z = Z + shift * y[:, None]
        views.append(Z)
    pattern = LabeledGraph([PLANTED_LABEL] * k0, {(a, a + 1): 0 for a in range(planted_edges)})
    return GraphCorpus(graphs, y), SideViewSet(views), pattern


@dataclass
class PlantedTensor:
    X: np.ndarray
    B: np.ndarray
    S: np.ndarray
    W: np.ndarray
    y: np.ndarray
    Z: np.ndarray


def synth_planted_tensor(seed, m=8, n=12, k=3, noise=0.0, side_dims=4):
    """``X = sum_r b_r o b_r o s_r`` with orthonormal ``S`` plus symmetric Gaussian noise.

    Labels are ``sign(S W)`` for a random ``W`` and side features are a
    random linear map of ``S`` plus 1% noise.
    """
    if k > n:
        raise InvalidArgument("k cannot exceed n")
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((m, k))
    S, _ = np.linalg.qr(rng.standard_normal((n, k)))
    X = cp_reconstruct(B, B, S)
    W = rng.standard_normal((k, 1))
    y = np.where(S @ W[:, 0] >= 0, 1.0, -1.0)
    Z = S @ rng.standard_normal((k, side_dims)) + 0.01 * rng.standard_normal((n, side_dims))
    if noise > 0:
        E = rng.standard_normal(X.shape)
        X = X + noise * 0.5 * (E + E.transpose(1, 0, 2))
    return PlantedTensor(X=X, B=B, S=S, W=W, y=y, Z=Z)


def synth_sessions(seed, n=16, delta=0.5, lengths=(10, 12), dims=(3, 2)):
    """Two-class sessions whose label is the sign of the view-1 mean.

    View 1 is shifted so its overall mean is ``+-delta * (1 + u)`` with
    ``u ~ U[0, 1)``; other views are noise. Lengths are drawn uniformly from
    ``lengths[0] .. lengths[1] - 1``.
    """
    if n < 2 or len(dims) < 1:
        raise InvalidArgument("need at least two sessions and one view")
    rng = np.random.default_rng(seed)
    y = np.array([0, 1] * (n // 2) + [0] * (n % 2))
    rng.shuffle(y)
    out = []
    for i in range(n):
        views = []
        for p, d in enumerate(dims):
            v = rng.normal(size=(int(rng.integers(*lengths)), d))
            if p == 0:
                v += -v.mean() + (1 if y[i] else -1) * delta * (1 + rng.random())
            views.append(v)
        out.append(SessionInstance(views, float(y[i]), f"s{i}"))
    return out
