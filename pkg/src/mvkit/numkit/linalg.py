import numpy as np
import scipy.linalg

from ..errors import InvalidArgument, SingularMatrix


def spd_solve(M, R):
    """Solve ``M X = R`` for symmetric positive (semi)definite ``M``.

    Cholesky first; on failure fall back to a symmetric eigendecomposition and
    raise :class:`SingularMatrix` if ``M`` is numerically rank deficient.
    """
    M = 0.5 * (M + M.T)
    try:
        c = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
        d = np.diag(c[0]) ** 2
        if np.max(d) > 0 and np.min(d) > 1e-13 * np.max(d):
            return scipy.linalg.cho_solve(c, R, check_finite=False)
    except np.linalg.LinAlgError:
        pass
    vals, vecs = np.linalg.eigh(M)
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    if scale == 0.0 or np.min(vals) <= 1e-13 * scale:
        raise SingularMatrix("system matrix is singular or indefinite")
    return vecs @ ((vecs.T @ R) / vals[:, None])


def ridge_solve(A, Y, gamma):
    """Ridge regression coefficients ``(A^T A + gamma I)^{-1} A^T Y``."""
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if A.ndim != 2:
        raise InvalidArgument("A must be a matrix")
    vector_out = Y.ndim == 1
    if vector_out:
        Y = Y[:, None]
    if Y.shape[0] != A.shape[0]:
        raise InvalidArgument(f"A has {A.shape[0]} rows but Y has {Y.shape[0]}")
    if gamma < 0:
        raise InvalidArgument("gamma must be nonnegative")
    M = A.T @ A + gamma * np.eye(A.shape[1])
    W = spd_solve(M, A.T @ Y)
    return W[:, 0] if vector_out else W
