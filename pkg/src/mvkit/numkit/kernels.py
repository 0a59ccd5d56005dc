from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import InvalidArgument


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice. For ``rbf`` the bandwidth defaults to the feature dimensionality."""

    kind: str = "rbf"
    bandwidth: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise InvalidArgument(f"unknown kernel kind {self.kind!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise InvalidArgument("rbf bandwidth must be positive")

    def width(self, d):
        return float(self.bandwidth) if self.bandwidth is not None else float(d)


def sq_distances(Z):
    Z = np.asarray(Z, dtype=float)
    sq = np.sum(Z * Z, axis=1)
    D = sq[:, None] + sq[None, :] - 2.0 * Z @ Z.T
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D


def kernel_matrix(Z, spec=KernelSpec()):
    """Gram matrix of the rows of ``Z`` (n x d).

    ``rbf``: ``exp(-||z_i - z_j||^2 / width)`` with width ``d`` unless given.
    ``linear``: ``Z Z^T``.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] < 1:
        raise InvalidArgument("Z must be a matrix with at least one row")
    if Z.shape[1] == 0:
        raise InvalidArgument("Z has no features")
    if not np.all(np.isfinite(Z)):
        raise InvalidArgument("Z contains non-finite entries")
    if spec.kind == "linear":
        K = Z @ Z.T
        return 0.5 * (K + K.T)
    K = np.exp(-sq_distances(Z) / spec.width(Z.shape[1]))
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return K


def laplacian(Phi, tol=1e-10):
    """``D - Phi`` where ``D`` holds the row sums of ``Phi`` (signed weights allowed)."""
    Phi = np.asarray(Phi, dtype=float)
    if Phi.ndim != 2 or Phi.shape[0] != Phi.shape[1]:
        raise InvalidArgument("Phi must be square")
    if Phi.size and np.max(np.abs(Phi - Phi.T)) > tol:
        raise InvalidArgument("Phi is not symmetric")
    return np.diag(Phi.sum(axis=1)) - Phi
