"""Tensor-based multi-view feature selection (tMVFS).

The weight tensor over the tensor product of the views is kept in factored
form ``W = w(1) o ... o w(m)``. Fixing every view but ``v`` turns the
factored support tensor machine into an ordinary linear SVM on rescaled
inputs ``x' = (Q_i / sqrt(P)) x``, where ``P`` is the product of the other
views' squared weight norms and ``Q_i`` the product of their responses on
instance ``i``. Features are then eliminated one at a time by the squared
weight criterion (or the kernel criterion with the dual variables held fixed).
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DegenerateInput, InvalidArgument
from .numkit.kernels import KernelSpec, sq_distances
from .numkit.svm import svm_train


@dataclass
class MultiViewDataset:
    """``views[v]`` is an ``I_v x n`` matrix (features x instances)."""

    views: List[np.ndarray]
    y: np.ndarray
    names: Optional[List[str]] = None
    feature_names: Optional[List[List[str]]] = None

    def __post_init__(self):
        self.views = [np.asarray(X, dtype=float) for X in self.views]
        self.y = np.asarray(self.y, dtype=float).ravel()
        if len(self.views) < 2:
            raise InvalidArgument("a multi-view dataset needs at least two views")
        for v, X in enumerate(self.views):
            if X.ndim != 2 or X.shape[1] != self.y.size:
                raise InvalidArgument(
                    f"view {v} has shape {X.shape}; expected (features, {self.y.size})")
            if X.shape[0] == 0:
                raise InvalidArgument(f"view {v} has no features")
        if self.names is None:
            self.names = [f"view{v + 1}" for v in range(len(self.views))]
        if self.feature_names is None:
            self.feature_names = [[f"f{i + 1}" for i in range(X.shape[0])] for X in self.views]

    @property
    def n(self):
        return self.y.size

    @property
    def m(self):
        return len(self.views)

    def subset(self, idx):
        idx = np.asarray(idx)
        return MultiViewDataset([X[:, idx] for X in self.views], self.y[idx], list(self.names),
                                [list(f) for f in self.feature_names])


@dataclass
class SelectionState:
    selected: List[np.ndarray]
    weights: List[np.ndarray]
    b: float
    targets: List[int]
    eliminated: List[List[int]] = field(default_factory=list)
    rounds: int = 0

    def report(self, names=None):
        names = names or [f"view{v + 1}" for v in range(len(self.selected))]
        return {
            "bias": float(self.b),
            "warmup_rounds": int(self.rounds),
            "views": [
                {
                    "name": names[v],
                    "target": int(self.targets[v]),
                    "selected": [int(i) for i in self.selected[v]],
                    "weights": [float(w) for w in self.weights[v]],
                    "eliminated_order": [int(i) for i in self.eliminated[v]],
                }
                for v in range(len(self.selected))
            ],
        }


def scale_view(X_v, Q, P):
    """Multiply column ``i`` of ``X_v`` by ``Q[i] / sqrt(P)``."""
    if not P > 0:
        raise InvalidArgument("P must be positive")
    X_v = np.asarray(X_v, dtype=float)
    Q = np.asarray(Q, dtype=float).ravel()
    if Q.size != X_v.shape[1]:
        raise InvalidArgument("Q must have one entry per instance")
    return X_v * (Q / np.sqrt(P))[None, :]


def cross_view_constants(weights, views, v):
    """``P`` and ``Q`` for view ``v`` from the other views' weights.

    ``weights[j]`` must match the rows of ``views[j]`` (already restricted to
    the surviving features).
    """
    n = views[0].shape[1]
    P = 1.0
    Q = np.ones(n)
    for j, (w, X) in enumerate(zip(weights, views)):
        if j == v:
            continue
        sq = float(np.dot(w, w))
        if sq == 0.0:
            raise DegenerateInput(f"weight vector of view {j} is zero")
        P *= sq
        Q = Q * (w @ X)
    return P, Q


def view_weights(alphas, y, Q, P, X_v):
    """``w = (1/P) sum_i Q_i a_i y_i x_i``."""
    coef = np.asarray(Q, dtype=float) * np.asarray(alphas, dtype=float) * np.asarray(y, dtype=float)
    X_v = np.asarray(X_v, dtype=float)
    if coef.size != X_v.shape[1]:
        raise InvalidArgument("alphas, y and Q must have one entry per instance")
    return (X_v @ coef) / P


def rank_linear(w_v):
    return np.asarray(w_v, dtype=float) ** 2


def rank_kernel(alphas, y, Xs, spec=KernelSpec("linear")):
    """Change of ``a^T H a`` when each feature is dropped, with ``a`` fixed.

    ``Xs`` is the scaled view (features x instances). For the RBF kernel the
    bandwidth stays at the current feature count while a feature is removed.
    """
    Xs = np.asarray(Xs, dtype=float)
    ay = np.asarray(alphas, dtype=float) * np.asarray(y, dtype=float)
    if spec.kind == "linear":
        # a^T H a - a^T H(-i) a = (sum_p a_p y_p x'_pi)^2
        return (Xs @ ay) ** 2
    Z = Xs.T
    width = spec.width(Z.shape[1])
    D = sq_distances(Z)
    K = np.exp(-D / width)
    full = ay @ K @ ay
    r = np.empty(Xs.shape[0])
    for i in range(Xs.shape[0]):
        d_i = (Z[:, i][:, None] - Z[:, i][None, :]) ** 2
        K_i = np.exp(-np.maximum(D - d_i, 0.0) / width)
        r[i] = full - ay @ K_i @ ay
    return r


def _argmin_order(r):
    return np.argsort(r, kind="stable")


def _train_view(views, weights, y, v, C, spec):
    try:
        P, Q = cross_view_constants(weights, views, v)
    except DegenerateInput:
        for j, w in enumerate(weights):
            if j != v and not np.any(w):
                weights[j] = np.full(w.size, 1.0 / np.sqrt(w.size))
        P, Q = cross_view_constants(weights, views, v)
    Xs = scale_view(views[v], Q, P)
    if spec.kind == "linear":
        sol = svm_train(Xs.T, y, C)
    else:
        Z = Xs.T
        K = np.exp(-sq_distances(Z) / spec.width(Z.shape[1]))
        sol = svm_train(Z, y, C, K=K)
    w = view_weights(sol.alphas, y, Q, P, views[v])
    return w, sol, Xs


def tmvfs_select(dataset, targets, C=1.0, spec=KernelSpec("linear"), alternations=3, chunk=1):
    """Run tMVFS and return the final :class:`SelectionState`.

    Schedule: up to ``alternations`` warm-up rounds retrain every view against
    the others' latest weights (stopping early once no view's ranking order
    changes); then views take turns eliminating ``chunk`` features each until
    every view is down to its target; a final round refits all views on the
    surviving features.
    """
    ds = dataset
    y = ds.y
    if not np.all((y == 1) | (y == -1)) or np.unique(y).size < 2:
        raise InvalidArgument("labels must be +1/-1 with both classes present")
    targets = [int(t) for t in targets]
    if len(targets) != ds.m:
        raise InvalidArgument("need one target per view")
    for v, (t, X) in enumerate(zip(targets, ds.views)):
        if not 1 <= t <= X.shape[0]:
            raise InvalidArgument(f"target {t} for view {v} outside 1..{X.shape[0]}")
    if not C > 0:
        raise InvalidArgument("C must be positive")
    if chunk < 1:
        raise InvalidArgument("chunk must be at least 1")

    selected = [np.arange(X.shape[0]) for X in ds.views]
    weights = [np.full(X.shape[0], 1.0 / np.sqrt(X.shape[0])) for X in ds.views]
    eliminated = [[] for _ in ds.views]
    b = 0.0

    def current(v):
        return ds.views[v][selected[v], :]

    rounds = 0
    if any(len(s) > t for s, t in zip(selected, targets)):
        orders = [None] * ds.m
        for rnd in range(alternations):
            changed = False
            for v in range(ds.m):
                views = [current(j) for j in range(ds.m)]
                w, sol, Xs = _train_view(views, weights, y, v, C, spec)
                weights[v], b = w, sol.b
                order = _argmin_order(_ranking(w, sol, y, Xs, spec))
                if orders[v] is None or not np.array_equal(order, orders[v]):
                    changed = True
                orders[v] = order
            rounds = rnd + 1
            if rnd > 0 and not changed:
                break

    while any(len(s) > t for s, t in zip(selected, targets)):
        for v in range(ds.m):
            excess = len(selected[v]) - targets[v]
            if excess <= 0:
                continue
            views = [current(j) for j in range(ds.m)]
            w, sol, Xs = _train_view(views, weights, y, v, C, spec)
            b = sol.b
            r = _ranking(w, sol, y, Xs, spec)
            drop = _argmin_order(r)[:min(chunk, excess)]
            keep = np.setdiff1d(np.arange(len(selected[v])), drop)
            eliminated[v].extend(int(i) for i in selected[v][drop])
            selected[v] = selected[v][keep]
            weights[v] = w[keep]

    for v in range(ds.m):
        views = [current(j) for j in range(ds.m)]
        w, sol, _ = _train_view(views, weights, y, v, C, spec)
        weights[v], b = w, sol.b

    return SelectionState(selected=selected, weights=weights, b=float(b), targets=targets,
                          eliminated=eliminated, rounds=rounds)


def _ranking(w, sol, y, Xs, spec):
    if spec.kind == "linear":
        return rank_linear(w)
    return rank_kernel(sol.alphas, y, Xs, spec)


def mv_decision(state, x):
    """Predicted label ``sign(prod_v <w(v), x(v)> + b)`` with ``sign(0) = +1``.

    ``x`` is a list of per-view vectors restricted to the selected features.
    """
    if len(x) != len(state.weights):
        raise InvalidArgument("one vector per view is required")
    prod = 1.0
    for w, xv in zip(state.weights, x):
        xv = np.asarray(xv, dtype=float).ravel()
        if xv.size != w.size:
            raise InvalidArgument(f"expected {w.size} features, got {xv.size}")
        prod *= float(w @ xv)
    return 1 if prod + state.b >= 0 else -1


def decision_values(state, views):
    """Vectorized decision values for full-width views (features x instances)."""
    out = None
    for w, s, X in zip(state.weights, state.selected, views):
        r = w @ np.asarray(X, dtype=float)[s, :]
        out = r if out is None else out * r
    return out + state.b


def predict(state, views: Sequence[np.ndarray]):
    return np.where(decision_values(state, views) >= 0, 1, -1)
