"""Dense third-order tensor algebra.

Tensors are plain ``numpy`` arrays of shape ``(I1, I2, I3)``. Unfoldings follow
the column-major convention: in the mode-k matricization the column index of
entry ``(i1, i2, i3)`` is ``sum_{p != k} i_p * J_p`` (0-based) with ``J_p`` the
product of the dimensions of the non-k modes that come before ``p``. With this
layout ``X_(1) = A (C kr B)^T`` holds for a CP tensor with factors ``A, B, C``.
"""
import numpy as np

from .errors import InvalidArgument

SYMMETRY_TOL = 1e-12


def as_tensor3(a):
    """Validate and return ``a`` as a finite float64 array of order 3."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 3:
        raise InvalidArgument(f"expected an order-3 tensor, got ndim={a.ndim}")
    if 0 in a.shape:
        raise InvalidArgument(f"tensor dimensions must be positive, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument("tensor contains non-finite entries")
    return a


def _vector(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidArgument(f"{name} must be a nonempty vector")
    if not np.all(np.isfinite(x)):
        raise InvalidArgument(f"{name} contains non-finite entries")
    return x


def outer_product(u, v, w):
    """Rank-one tensor ``u o v o w`` with entries ``u[i] v[j] w[k]``."""
    u, v, w = _vector(u, "u"), _vector(v, "v"), _vector(w, "w")
    return u[:, None, None] * v[None, :, None] * w[None, None, :]


def inner_product(a, b):
    """Sum of the entrywise products of two same-sized tensors."""
    a, b = as_tensor3(a), as_tensor3(b)
    if a.shape != b.shape:
        raise InvalidArgument(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a.ravel(), b.ravel()))


def frobenius_norm(a):
    return float(np.sqrt(inner_product(a, a)))


def _check_mode(k):
    if k not in (1, 2, 3):
        raise InvalidArgument(f"mode must be 1, 2 or 3, got {k!r}")


def mode_k_matricize(a, k):
    """Mode-k unfolding (``k`` is 1-based), shape ``I_k x prod(other dims)``."""
    _check_mode(k)
    a = as_tensor3(a)
    return np.reshape(np.moveaxis(a, k - 1, 0), (a.shape[k - 1], -1), order="F")


def mode_k_refold(mat, k, shape):
    """Inverse of :func:`mode_k_matricize`."""
    _check_mode(k)
    shape = tuple(int(s) for s in shape)
    if len(shape) != 3:
        raise InvalidArgument("shape must have three entries")
    mat = np.asarray(mat, dtype=float)
    moved = (shape[k - 1],) + tuple(s for i, s in enumerate(shape) if i != k - 1)
    if mat.shape != (moved[0], moved[1] * moved[2]):
        raise InvalidArgument(f"matrix shape {mat.shape} does not match tensor shape {shape}")
    return np.moveaxis(np.reshape(mat, moved, order="F"), 0, k - 1)


def khatri_rao(A, B):
    """Column-wise Kronecker product; column ``f`` is ``kron(A[:, f], B[:, f])``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2:
        raise InvalidArgument("khatri_rao expects two matrices")
    if A.shape[1] != B.shape[1]:
        raise InvalidArgument(f"column mismatch: {A.shape[1]} vs {B.shape[1]}")
    return (A[:, None, :] * B[None, :, :]).reshape(A.shape[0] * B.shape[0], A.shape[1])


def mode_k_product(a, k, M):
    """``a x_k M``: contract mode ``k`` of ``a`` with the columns of ``M`` (J x I_k)."""
    _check_mode(k)
    a = as_tensor3(a)
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] != a.shape[k - 1]:
        raise InvalidArgument(
            f"matrix of shape {M.shape} cannot multiply mode {k} of size {a.shape[k - 1]}")
    out = np.tensordot(M, a, axes=([1], [k - 1]))
    return np.moveaxis(out, 0, k - 1)


def identity_tensor(k):
    """Superdiagonal ``k x k x k`` tensor with ones where all indices agree."""
    C = np.zeros((k, k, k))
    idx = np.arange(k)
    C[idx, idx, idx] = 1.0
    return C


def cp_reconstruct(A, B, C):
    """Dense ``sum_f A[:, f] o B[:, f] o C[:, f]``."""
    return np.einsum("if,jf,kf->ijk", A, B, C)


def stack_networks(mats, tol=SYMMETRY_TOL):
    """Stack symmetric ``m x m`` matrices into an ``m x m x n`` partially symmetric tensor.

    Matrices within ``tol`` of symmetric are symmetrized by averaging with their
    transpose, so ``X[i, j, s] == X[j, i, s]`` holds exactly. The returned array
    is read-only.
    """
    mats = [np.asarray(M, dtype=float) for M in mats]
    if not mats:
        raise InvalidArgument("need at least one network")
    m = mats[0].shape[0] if mats[0].ndim == 2 else -1
    out = np.empty((m, m, len(mats))) if m > 0 else None
    for s, M in enumerate(mats):
        if M.ndim != 2 or M.shape != (m, m) or m <= 0:
            raise InvalidArgument(f"network {s} has shape {M.shape}, expected ({m}, {m})")
        if not np.all(np.isfinite(M)):
            raise InvalidArgument(f"network {s} contains non-finite entries")
        if np.max(np.abs(M - M.T)) > tol:
            raise InvalidArgument(f"network {s} is not symmetric within {tol:g}")
        out[:, :, s] = 0.5 * (M + M.T)
    out.setflags(write=False)
    return out


def is_partially_symmetric(X):
    X = np.asarray(X)
    return X.ndim == 3 and X.shape[0] == X.shape[1] and np.array_equal(X, X.transpose(1, 0, 2))
