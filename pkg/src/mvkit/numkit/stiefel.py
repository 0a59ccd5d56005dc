"""Feasible minimization over matrices with orthonormal columns.

Curvilinear search along the Cayley transform
``Y(tau) = (I + tau/2 A)^{-1} (I - tau/2 A) X`` with ``A = G X^T - X G^T``,
Barzilai-Borwein step sizes and a nonmonotone Armijo condition (Zhang-Hager
averaging of past objective values). Every iterate stays on the manifold.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import InvalidArgument

FEAS_TOL = 1e-8


@dataclass
class StiefelProblem:
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    S0: np.ndarray


@dataclass
class StiefelResult:
    S: np.ndarray
    f: float
    grad_norm: float
    n_iter: int
    converged: bool


def feasibility(S):
    S = np.asarray(S, dtype=float)
    return float(np.linalg.norm(S.T @ S - np.eye(S.shape[1])))


def _nearest_orthonormal(S):
    U, _, Vt = np.linalg.svd(S, full_matrices=False)
    return U @ Vt


def stiefel_minimize(problem, max_iters=1000, tol=1e-6, tau0=1e-3, rho=1e-4,
                     eta=0.1, gamma=0.85, max_backtracks=5, return_info=False):
    """Minimize ``problem.objective`` subject to ``S^T S = I``.

    Stops when ``||G - S G^T S||_F <= tol`` or after ``max_iters`` iterations.
    The best iterate seen is returned, so the result never has a larger
    objective than ``S0``.
    """
    X = np.array(problem.S0, dtype=float)
    if X.ndim != 2 or X.shape[1] > X.shape[0]:
        raise InvalidArgument("S0 must be a tall matrix")
    if feasibility(X) > FEAS_TOL:
        raise InvalidArgument("S0 does not have orthonormal columns")
    fun, grad = problem.objective, problem.gradient
    p = X.shape[1]
    I2p = np.eye(2 * p)

    F = float(fun(X))
    G = np.asarray(grad(X), dtype=float)
    dtX = G - X @ (G.T @ X)
    nrmG = float(np.linalg.norm(dtX))
    best = (F, X, nrmG)
    Q, Cval, tau = 1.0, F, tau0
    n_iter = 0
    while nrmG > tol and n_iter < max_iters:
        XP, FP, dtXP = X, F, dtX
        U = np.hstack([G, XP])
        V = np.hstack([XP, -G])
        VU = V.T @ U
        VX = V.T @ XP
        deriv = rho * nrmG ** 2
        for nls in range(max_backtracks + 1):
            aa = np.linalg.solve(I2p + (0.5 * tau) * VU, VX)
            X = XP - U @ (tau * aa)
            F = float(fun(X))
            if F <= Cval - tau * deriv or nls == max_backtracks:
                break
            tau *= eta
        if feasibility(X) > 1e-12:
            X = _nearest_orthonormal(X)
            F = float(fun(X))
        assert feasibility(X) <= FEAS_TOL, "iterate left the Stiefel manifold"
        G = np.asarray(grad(X), dtype=float)
        dtX = G - X @ (G.T @ X)
        nrmG = float(np.linalg.norm(dtX))
        n_iter += 1
        if F < best[0]:
            best = (F, X, nrmG)
        S = X - XP
        Y = dtX - dtXP
        sy = abs(float(np.sum(S * Y)))
        if sy > 0:
            tau = float(np.sum(S * S)) / sy if n_iter % 2 == 0 else sy / float(np.sum(Y * Y))
        else:
            tau = tau0
        tau = min(max(tau, 1e-20), 1e20)
        Qp = Q
        Q = gamma * Qp + 1.0
        Cval = (gamma * Qp * Cval + F) / Q
    F_best, X_best, g_best = best
    if F <= F_best:
        F_best, X_best, g_best = F, X, nrmG
    if return_info:
        return StiefelResult(S=X_best, f=F_best, grad_norm=g_best, n_iter=n_iter,
                             converged=g_best <= tol)
    return X_best
