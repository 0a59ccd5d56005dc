"""Signed Laplacian criterion for subgraph patterns and its pruning bound."""
import numpy as np

from ..errors import DegenerateInput, InvalidArgument
from ..numkit.kernels import laplacian


def build_theta(K, strict=True):
    """Side-view constraint matrix from kernel ``K``.

    Pairs with ``K >= mean(K)`` get ``1/|H|`` and the rest ``-1/|L|``. With
    ``strict=False`` an empty group contributes zeros instead of raising.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidArgument("kernel must be square")
    if not np.allclose(K, K.T, rtol=0, atol=1e-10):
        raise InvalidArgument("kernel must be symmetric")
    mu = K.mean()
    high = K >= mu
    n_h = int(high.sum())
    n_l = high.size - n_h
    if strict and (n_h == 0 or n_l == 0):
        raise DegenerateInput(
            "side-view kernel is constant, so the low-similarity set is empty; "
            "drop this side view or set its weight to 0")
    theta = np.zeros_like(K)
    if n_h:
        theta[high] = 1.0 / n_h
    if n_l:
        theta[~high] = -1.0 / n_l
    return theta


def build_omega(y, strict=True):
    """Label constraint matrix over ordered pairs (diagonal included).

    ``y`` holds +1/-1 for labeled instances and 0 for unlabeled ones. With no
    labeled instances the result is all zeros. With ``strict=False`` an empty
    must-link or cannot-link set contributes zeros instead of raising.
    """
    y = np.asarray(y, dtype=float).ravel()
    if not np.all(np.isin(y, (-1.0, 0.0, 1.0))):
        raise InvalidArgument("labels must be -1, +1 or 0 (unlabeled)")
    prod = np.outer(y, y)
    same = prod > 0
    diff = prod < 0
    n_m, n_c = int(same.sum()), int(diff.sum())
    omega = np.zeros((y.size, y.size))
    if n_m == 0 and n_c == 0:
        return omega
    if strict and (n_m == 0 or n_c == 0):
        raise DegenerateInput(
            "labeled graphs all share one class, so the cannot-link set is empty; "
            "label at least one graph of each class")
    if n_m:
        omega[same] = 1.0 / n_m
    if n_c:
        omega[diff] = -1.0 / n_c
    return omega


def build_phi(omega, thetas, lambdas):
    """Return ``(Phi, L, Lhat)`` with ``Lhat = min(0, L)`` entrywise."""
    omega = np.asarray(omega, dtype=float)
    if len(thetas) != len(lambdas):
        raise InvalidArgument("one lambda per theta is required")
    phi = omega.copy()
    for theta, lam in zip(thetas, lambdas):
        if lam < 0:
            raise InvalidArgument("lambda must be nonnegative")
        theta = np.asarray(theta, dtype=float)
        if theta.shape != phi.shape:
            raise InvalidArgument(f"theta shape {theta.shape} != {phi.shape}")
        if lam:
            phi = phi + lam * theta
    L = laplacian(phi)
    return phi, L, np.minimum(L, 0.0)


def _check_indicator(f, n):
    f = np.asarray(f).ravel()
    if f.size != n:
        raise InvalidArgument(f"indicator has {f.size} entries, expected {n}")
    if not np.all((f == 0) | (f == 1)):
        raise InvalidArgument("indicator must be binary")
    return f.astype(bool)


def gside_score(f, L):
    """``q = f^T L f``: the sum of ``L`` over supporting pairs."""
    L = np.asarray(L, dtype=float)
    s = _check_indicator(f, L.shape[0])
    return float(L[np.ix_(s, s)].sum())


def gside_bound(f, Lhat):
    """Lower bound ``f^T Lhat f`` on the score of any supergraph pattern."""
    return gside_score(f, Lhat)
