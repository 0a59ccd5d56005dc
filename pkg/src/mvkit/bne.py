"""Partially symmetric CP factorization of stacked brain networks (tBNE).

A tensor ``X`` of shape ``(m, m, n)`` (n symmetric networks over m nodes) is
approximated by ``sum_r b_r o b_r o s_r`` with orthonormal subject factors
``S``. The symmetric node factor is split into two copies ``B`` and ``P``
linked by ADMM. Side information enters through a graph Laplacian ``L_Z`` on
subjects and labels through a ridge classifier ``W`` on labeled rows of ``S``.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InvalidArgument, StateError
from .numkit.kernels import KernelSpec, kernel_matrix, laplacian
from .numkit.linalg import ridge_solve, spd_solve
from .numkit.stiefel import StiefelProblem, feasibility, stiefel_minimize
from .tensor import as_tensor3, cp_reconstruct, khatri_rao, mode_k_matricize


@dataclass
class BNEConfig:
    k: int = 3
    alpha: float = 0.1
    beta: float = 0.1
    gamma: float = 0.25
    mu0: float = 1e-6
    rho: float = 1.15
    mu_max: float = 1e6
    tol: float = 1e-4
    max_iter: int = 500
    seed: int = 0
    stiefel_iters: int = 100
    stiefel_tol: float = 1e-8

    def __post_init__(self):
        if self.k < 1:
            raise InvalidArgument("rank k must be at least 1")
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name) < 0:
                raise InvalidArgument(f"{name} must be nonnegative")
        if not self.rho > 1:
            raise InvalidArgument("rho must exceed 1")
        if not 0 < self.mu0 <= self.mu_max:
            raise InvalidArgument("need 0 < mu0 <= mu_max")
        if self.max_iter < 1:
            raise InvalidArgument("max_iter must be at least 1")


@dataclass
class GuidanceKernel:
    """Subject similarity from side features and its Laplacian."""

    K: np.ndarray
    L: np.ndarray = None

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        if self.L is None:
            self.L = laplacian(self.K)

    @classmethod
    def from_features(cls, Z, spec=KernelSpec("linear")):
        return cls(kernel_matrix(Z, spec))

    @classmethod
    def empty(cls, n):
        return cls(np.zeros((n, n)))


@dataclass
class BNEModel:
    B: np.ndarray
    P: np.ndarray
    S: np.ndarray
    W: np.ndarray
    U: np.ndarray
    mu: float
    labeled: np.ndarray
    converged: bool = False
    n_iter: int = 0
    history: List[float] = field(default_factory=list)  # explained variation per iteration

    @property
    def node_factors(self):
        return 0.5 * (self.B + self.P)

    def reconstruct(self):
        N = self.node_factors
        return cp_reconstruct(N, N, self.S)


def _rows(D, S):
    """Apply the label selector: an index array or an explicit ``l x n`` matrix."""
    D = np.asarray(D)
    if D.ndim == 2:
        return D.astype(float) @ S
    return S[D.astype(int)]


def _rows_adjoint(D, R, n):
    D = np.asarray(D)
    if D.ndim == 2:
        return D.astype(float).T @ R
    out = np.zeros((n, R.shape[1]))
    np.add.at(out, D.astype(int), R)
    return out


def _check_shapes(X, B, S):
    m1, m2, n = X.shape
    if m1 != m2:
        raise InvalidArgument("the first two modes must have equal size")
    if B.shape[0] != m1 or S.shape[0] != n or B.shape[1] != S.shape[1]:
        raise InvalidArgument(
            f"factor shapes {B.shape}, {S.shape} do not match tensor {X.shape}")


def objective(model, X, L_Z, D, Y, cfg):
    """Full objective with ``B`` on both symmetric modes."""
    X = as_tensor3(X)
    B, S, W = model.B, model.S, model.W
    _check_shapes(X, B, S)
    fit = float(np.sum((X - cp_reconstruct(B, B, S)) ** 2))
    guide = float(np.trace(S.T @ L_Z @ S))
    total = fit + cfg.alpha * guide + cfg.gamma * float(np.sum(W ** 2))
    if Y is not None and np.asarray(Y).size:
        total += cfg.beta * float(np.sum((_rows(D, S) @ W - Y) ** 2))
    return total


def update_B(X, S, P, U, mu):
    """Closed-form minimizer of the augmented Lagrangian in ``B``."""
    if not mu > 0:
        raise InvalidArgument("mu must be positive")
    X = as_tensor3(X)
    S, P, U = (np.asarray(a, dtype=float) for a in (S, P, U))
    E = khatri_rao(S, P)
    gram = (S.T @ S) * (P.T @ P)
    M = 2.0 * gram + mu * np.eye(S.shape[1])
    R = 2.0 * mode_k_matricize(X, 1) @ E + mu * P + U
    return spd_solve(M, R.T).T


def update_P(X, S, B, U, mu):
    """Closed-form minimizer of the augmented Lagrangian in ``P``."""
    if not mu > 0:
        raise InvalidArgument("mu must be positive")
    X = as_tensor3(X)
    S, B, U = (np.asarray(a, dtype=float) for a in (S, B, U))
    F = khatri_rao(S, B)
    gram = (S.T @ S) * (B.T @ B)
    M = 2.0 * gram + mu * np.eye(S.shape[1])
    R = 2.0 * mode_k_matricize(X, 2) @ F + mu * B - U
    return spd_solve(M, R.T).T


def update_U(U, P, B, mu):
    return U + mu * (P - B)


def subject_objective(S, X3, G, L_Z, D, W, Y, alpha, beta):
    """``||S G^T - X_(3)||^2 + alpha tr(S^T L_Z S) + beta ||D S W - Y||^2``."""
    val = float(np.sum((S @ G.T - X3) ** 2)) + alpha * float(np.trace(S.T @ L_Z @ S))
    if beta and Y is not None and np.asarray(Y).size:
        val += beta * float(np.sum((_rows(D, S) @ W - Y) ** 2))
    return val


def subject_gradient(S, X, G, L_Z, D, W, Y, alpha, beta):
    """``S G^T G - X_(3) G + alpha L_Z S + beta D^T (D S W - Y) W^T``.

    This is half the gradient of :func:`subject_objective`. ``X`` may be the
    tensor or its mode-3 matricization.
    """
    X3 = mode_k_matricize(X, 3) if np.ndim(X) == 3 else np.asarray(X, dtype=float)
    g = S @ (G.T @ G) - X3 @ G + alpha * (L_Z @ S)
    if beta and Y is not None and np.asarray(Y).size:
        resid = _rows(D, S) @ W - Y
        g = g + beta * _rows_adjoint(D, resid @ W.T, S.shape[0])
    return g


def update_W(S, D, Y, gamma):
    """Ridge solution ``(S^T D^T D S + gamma I)^{-1} S^T D^T Y``."""
    if not gamma > 0:
        raise InvalidArgument("gamma must be positive")
    return ridge_solve(_rows(D, np.asarray(S, dtype=float)), Y, gamma)


def consensus_gap(model):
    """``||P - B|| / ||B||``."""
    nb = float(np.linalg.norm(model.B))
    return float(np.linalg.norm(model.P - model.B)) / nb if nb > 0 else 0.0


def explained_variation(X, Xhat):
    nx = float(np.sum(X ** 2))
    if nx == 0:
        return 1.0 if not np.any(Xhat) else -np.inf
    return 1.0 - float(np.sum((X - Xhat) ** 2)) / nx


def _align_signs(model):
    """Flip ``(P_r, S_r, W_r)`` wherever ``<B_r, P_r> < 0``.

    The flip leaves every term of the objective unchanged and shrinks
    ``||P - B||``, so the consensus step never has to pull a column through zero.
    """
    flip = np.sum(model.B * model.P, axis=0) < 0
    if np.any(flip):
        sign = np.where(flip, -1.0, 1.0)
        model.P = model.P * sign
        model.S = model.S * sign
        model.W = model.W * sign[:, None]


def _polar(M):
    U, _, Vt = np.linalg.svd(M, full_matrices=False)
    return U @ Vt


def _subject_step(f, g, S_prev, cfg):
    """Curvilinear S-step from two starts, keeping the lower objective.

    The warm start can sit on a saddle point when a component changes sign
    between outer iterations; the second start is the orthonormal maximizer
    of the linear part ``-grad(0)``.
    """
    best = None
    for S0 in (S_prev, _polar(-g(np.zeros_like(S_prev)))):
        res = stiefel_minimize(StiefelProblem(f, g, S0), max_iters=cfg.stiefel_iters,
                               tol=cfg.stiefel_tol, return_info=True)
        if best is None or res.f < best.f:
            best = res
    return best.S


def _initial_model(X, c, labeled, cfg):
    m, _, n = X.shape
    if cfg.k > n:
        raise InvalidArgument(f"rank {cfg.k} exceeds the number of subjects {n}")
    rng = np.random.default_rng(cfg.seed)
    B = rng.standard_normal((m, cfg.k))
    S, R = np.linalg.qr(rng.standard_normal((n, cfg.k)))
    S = S * np.where(np.diag(R) < 0, -1.0, 1.0)
    W = rng.standard_normal((cfg.k, c))
    return BNEModel(B=B, P=B.copy(), S=S, W=W, U=np.zeros_like(B), mu=cfg.mu0,
                    labeled=labeled)


def tbne_fit(X, guidance: Optional[GuidanceKernel] = None, Y=None, cfg: BNEConfig = None,
             labeled=None):
    """Alternate the B, P, U, S and W updates until explained variation settles.

    ``Y`` holds one row per labeled subject; ``labeled`` lists their indices and
    defaults to the first ``len(Y)`` subjects. Stops when the change in
    explained variation falls below ``cfg.tol`` while the split copies agree
    to ``1e-3`` (returned model has ``converged=True``) or after
    ``cfg.max_iter`` iterations.
    """
    cfg = cfg or BNEConfig()
    X = as_tensor3(X)
    if not np.all(np.isfinite(X)):
        raise InvalidArgument("tensor contains non-finite entries")
    n = X.shape[2]
    L_Z = np.zeros((n, n)) if guidance is None else guidance.L
    if L_Z.shape != (n, n):
        raise InvalidArgument(f"guidance is {L_Z.shape}, expected ({n}, {n})")
    if Y is None:
        Y = np.zeros((0, 1))
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    labeled = np.arange(Y.shape[0]) if labeled is None else np.asarray(labeled, dtype=int)
    if labeled.size != Y.shape[0] or labeled.size > n:
        raise InvalidArgument("labels and labeled indices disagree")
    use_labels = labeled.size > 0 and cfg.beta > 0
    if labeled.size and not cfg.gamma > 0:
        raise InvalidArgument("gamma must be positive when labels are given")

    model = _initial_model(X, Y.shape[1], labeled, cfg)
    X3 = mode_k_matricize(X, 3)
    beta = cfg.beta if use_labels else 0.0
    prev = None
    for it in range(1, cfg.max_iter + 1):
        model.B = update_B(X, model.S, model.P, model.U, model.mu)
        model.P = update_P(X, model.S, model.B, model.U, model.mu)
        _align_signs(model)
        model.U = update_U(model.U, model.P, model.B, model.mu)
        model.mu = min(cfg.rho * model.mu, cfg.mu_max)

        G = khatri_rao(model.P, model.B)
        W = model.W

        def f(S):
            return 0.5 * subject_objective(S, X3, G, L_Z, labeled, W, Y, cfg.alpha, beta)

        def g(S):
            return subject_gradient(S, X3, G, L_Z, labeled, W, Y, cfg.alpha, beta)

        model.S = _subject_step(f, g, model.S, cfg)
        if labeled.size:
            model.W = update_W(model.S, labeled, Y, cfg.gamma)

        ev = explained_variation(X, cp_reconstruct(model.B, model.P, model.S))
        model.history.append(ev)
        model.n_iter = it
        if prev is not None and abs(ev - prev) < cfg.tol and consensus_gap(model) <= 1e-3:
            model.converged = True
            break
        prev = ev
    if feasibility(model.S) > 1e-6:
        raise AssertionError("subject factors lost orthonormality")
    return model


def tbne_embed_predict(model, rows=None):
    """Class scores ``S[rows] W`` and predictions (argmax, or sign when c = 1)."""
    if model is None or model.S is None or model.W is None:
        raise StateError("model is not fitted")
    S = model.S if rows is None else model.S[np.asarray(rows, dtype=int)]
    scores = S @ model.W
    if model.W.shape[1] == 1:
        pred = np.where(scores[:, 0] >= 0, 1, -1)
    else:
        pred = np.argmax(scores, axis=1)
    return scores, pred
