"""Branch-and-bound top-k mining of discriminative subgraphs guided by side views."""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import InvalidArgument
from ..numkit.kernels import kernel_matrix
from .graph import GraphCorpus, SideViewSet, contains
from .gside import build_omega, build_phi, build_theta, gside_bound, gside_score
from .gspan import DFSCode, gspan_enumerate


@dataclass
class ScoredPattern:
    code: DFSCode
    f: np.ndarray
    q: float
    q_hat: float
    order: int  # position in canonical visit order

    @property
    def support(self):
        return int(self.f.sum())

    def graph(self):
        return self.code.to_graph()

    def to_dict(self):
        return {
            "code": self.code.to_list(),
            "support": self.support,
            "q": float(self.q),
            "q_hat": float(self.q_hat),
            "indicator": "".join(str(int(b)) for b in self.f),
        }


@dataclass
class VisitRecord:
    code: DFSCode
    f: np.ndarray
    q: float
    q_hat: float
    parent: Optional[int]


@dataclass
class MiningResult:
    patterns: List[ScoredPattern]
    explored: int
    pruned: int
    trace: List[VisitRecord] = field(default_factory=list)

    def report(self):
        return {
            "explored": int(self.explored),
            "pruned_subtrees": int(self.pruned),
            "patterns": [p.to_dict() for p in self.patterns],
        }


def gside_laplacians(corpus: GraphCorpus, sideviews: Optional[SideViewSet] = None):
    """``(Phi, L, Lhat)`` from corpus labels and side-view kernels."""
    omega = build_omega(corpus.y)
    thetas, lambdas = [], []
    if sideviews is not None:
        for Z, lam in zip(sideviews.views, sideviews.lambdas):
            if Z.shape[0] != corpus.n:
                raise InvalidArgument(
                    f"side view has {Z.shape[0]} rows for {corpus.n} graphs")
            if lam == 0:
                continue
            thetas.append(build_theta(kernel_matrix(Z, sideviews.kernel)))
            lambdas.append(lam)
    return build_phi(omega, thetas, lambdas)


def gmsv_mine(corpus, sideviews=None, k=10, min_sup=2, max_edges=4, prune=True,
              record=False):
    """Top-``k`` patterns with the smallest score, ties broken by canonical order.

    With ``prune=True`` a subtree is skipped once its bound reaches the
    current k-th best score. The threshold stays infinite until ``k``
    patterns are held, so pruning never changes the result.
    """
    if k < 1:
        raise InvalidArgument("k must be at least 1")
    _, L, Lhat = gside_laplacians(corpus, sideviews)
    top: List[ScoredPattern] = []
    trace: List[VisitRecord] = []
    stack: List[int] = []  # trace indices along the current DFS path
    state = {"order": 0, "theta": np.inf}

    def visit(code, f):
        q = gside_score(f, L)
        q_hat = gside_bound(f, Lhat)
        order = state["order"]
        state["order"] += 1
        if record:
            while stack and len(trace[stack[-1]].code) >= len(code):
                stack.pop()
            trace.append(VisitRecord(code, f, q, q_hat, stack[-1] if stack else None))
            stack.append(len(trace) - 1)
        if len(top) < k or q < state["theta"]:
            top.append(ScoredPattern(code, f, q, q_hat, order))
            if len(top) > k:
                worst = max(range(len(top)), key=lambda i: (top[i].q, top[i].order))
                top.pop(worst)
            if len(top) == k:
                state["theta"] = max(p.q for p in top)
        if prune and q_hat >= state["theta"]:
            return False
        return True

    stats = gspan_enumerate(corpus.graphs, min_sup, max_edges, visit)
    top.sort(key=lambda p: (p.q, p.order))
    return MiningResult(top, stats.visited, stats.pruned, trace)


def feature_matrix(patterns, corpus):
    """Binary ``k x n`` matrix; entry ``(i, j)`` is 1 iff pattern ``i`` occurs in graph ``j``."""
    graphs = corpus.graphs if isinstance(corpus, GraphCorpus) else list(corpus)
    out = np.zeros((len(patterns), len(graphs)), dtype=np.int8)
    for i, p in enumerate(patterns):
        pg = p.graph() if isinstance(p, ScoredPattern) else (
            p.to_graph() if isinstance(p, DFSCode) else p)
        for j, g in enumerate(graphs):
            out[i, j] = contains(g, pg)
    return out
