"""Soft-margin SVM trained in the dual.

Solves ``min 1/2 a^T Q a - 1^T a  s.t.  y^T a = 0, 0 <= a <= C`` with
``Q = (y y^T) * K`` by two-coordinate descent: each step picks the maximal
violating pair (second-order choice for the partner), solves the
two-variable subproblem in closed form and clips it to the box.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConvergenceFailure, InvalidArgument

TAU = 1e-12


@dataclass
class SvmSolution:
    alphas: np.ndarray
    w: Optional[np.ndarray]
    b: float
    C: float
    residual: float
    n_iter: int

    def decision(self, X):
        if self.w is None:
            raise InvalidArgument("decision() needs primal weights; use a linear kernel")
        return np.asarray(X, dtype=float) @ self.w + self.b


def _check_labels(y):
    y = np.asarray(y, dtype=float).ravel()
    if not np.all((y == 1) | (y == -1)):
        raise InvalidArgument("labels must be +1 or -1")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise InvalidArgument("both classes must be present")
    return y


def kkt_residual(alphas, y, grad, C):
    """Maximal violating pair gap ``m(a) - M(a)``; zero at an exact optimum."""
    yg = -y * grad
    up = ((y > 0) & (alphas < C)) | ((y < 0) & (alphas > 0))
    low = ((y > 0) & (alphas > 0)) | ((y < 0) & (alphas < C))
    if not up.any() or not low.any():
        return 0.0
    return float(np.max(yg[up]) - np.min(yg[low]))


def svm_train(X, y, C=1.0, K=None, tol=1e-6, max_iter=100_000):
    """Train a binary SVM.

    Parameters
    ----------
    X : (n, d) array
        Training points. Used for the linear Gram matrix and for the primal
        weights ``w = sum_i a_i y_i x_i``.
    y : (n,) array of +1/-1
    C : float
        Box constraint.
    K : (n, n) array, optional
        Precomputed kernel matrix. When given, ``w`` is not formed.
    tol : float
        Stop once the maximal violating pair gap is at most ``tol``.
    max_iter : int
        Cap on two-coordinate updates.

    Raises
    ------
    InvalidArgument
        Single-class labels, ``C <= 0`` or shape problems.
    ConvergenceFailure
        Iteration cap reached; ``residual`` holds the last gap.
    """
    X = np.asarray(X, dtype=float)
    y = _check_labels(y)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise InvalidArgument(f"X has shape {X.shape} but there are {y.size} labels")
    if not C > 0:
        raise InvalidArgument("C must be positive")
    linear = K is None
    if linear:
        K = X @ X.T
    else:
        K = np.asarray(K, dtype=float)
        if K.shape != (y.size, y.size):
            raise InvalidArgument("kernel matrix shape does not match labels")
    Q = (y[:, None] * y[None, :]) * K
    QD = np.diag(Q).copy()
    n = y.size
    alphas = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    n_iter = 0
    gap = np.inf
    while True:
        yg = -y * grad
        up = (pos & (alphas < C)) | (~pos & (alphas > 0))
        low = (pos & (alphas > 0)) | (~pos & (alphas < C))
        up_idx = np.flatnonzero(up)
        i = up_idx[np.argmax(yg[up_idx])]
        gmax = yg[i]
        low_idx = np.flatnonzero(low)
        gap = gmax - np.min(yg[low_idx])
        if gap <= tol:
            break
        if n_iter >= max_iter:
            raise ConvergenceFailure(
                f"SVM did not reach tol={tol:g} in {max_iter} iterations (gap {gap:.3e})",
                residual=float(gap))
        # second-order partner selection among violating candidates
        cand = low_idx[yg[low_idx] < gmax]
        b_it = gmax - yg[cand]
        a_it = QD[i] + QD[cand] - 2.0 * y[i] * y[cand] * Q[i, cand]
        a_it = np.where(a_it > 0, a_it, TAU)
        j = cand[np.argmin(-(b_it * b_it) / a_it)]
        _update_pair(i, j, alphas, grad, Q, QD, y, C)
        n_iter += 1
    w = X.T @ (alphas * y) if linear else None
    b = _bias(alphas, y, grad, C)
    return SvmSolution(alphas=alphas, w=w, b=b, C=float(C), residual=float(gap), n_iter=n_iter)


def _update_pair(i, j, alphas, grad, Q, QD, y, C):
    old_i, old_j = alphas[i], alphas[j]
    if y[i] != y[j]:
        quad = QD[i] + QD[j] + 2.0 * Q[i, j]
        delta = (-grad[i] - grad[j]) / max(quad, TAU)
        diff = old_i - old_j
        ai, aj = old_i + delta, old_j + delta
        if diff > 0:
            if aj < 0:
                aj, ai = 0.0, diff
        elif ai < 0:
            ai, aj = 0.0, -diff
        if diff > 0:
            if ai > C:
                ai, aj = C, C - diff
        elif aj > C:
            aj, ai = C, C + diff
    else:
        quad = QD[i] + QD[j] - 2.0 * Q[i, j]
        delta = (grad[i] - grad[j]) / max(quad, TAU)
        total = old_i + old_j
        ai, aj = old_i - delta, old_j + delta
        if total > C:
            if ai > C:
                ai, aj = C, total - C
        elif aj < 0:
            aj, ai = 0.0, total
        if total > C:
            if aj > C:
                aj, ai = C, total - C
        elif ai < 0:
            ai, aj = 0.0, total
    alphas[i], alphas[j] = ai, aj
    grad += Q[:, i] * (ai - old_i) + Q[:, j] * (aj - old_j)


def _bias(alphas, y, grad, C):
    yg = y * grad
    free = (alphas > 0) & (alphas < C)
    if free.any():
        rho = float(np.mean(yg[free]))
    else:
        at_upper = alphas >= C
        ub_mask = ((y > 0) & ~at_upper) | ((y < 0) & at_upper)
        lb_mask = ((y > 0) & at_upper) | ((y < 0) & ~at_upper)
        ub = np.min(yg[ub_mask]) if ub_mask.any() else np.inf
        lb = np.max(yg[lb_mask]) if lb_mask.any() else -np.inf
        if np.isfinite(ub) and np.isfinite(lb):
            rho = 0.5 * (ub + lb)
        else:
            rho = float(ub if np.isfinite(ub) else lb)
    return -rho
