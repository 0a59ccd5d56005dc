import glob
import os

import numpy as np

from ..errors import InvalidArgument
from ..tensor import stack_networks
from ._csv import read_labels, read_matrix, require_dir, write_labels, write_matrix


def load_network_stack(path):
    """``networks/*.csv`` (m x m, no header), ``side.csv`` and ``labels.csv``.

    Returns ``(X, Z, y)``: the ``(m, m, n)`` tensor in file-name order, the
    ``n x d`` side features and labels with NaN for unlabeled subjects.
    """
    require_dir(path)
    files = sorted(glob.glob(os.path.join(path, "networks", "*.csv")))
    if not files:
        raise InvalidArgument(f"no network CSVs under {os.path.join(path, 'networks')}")
    mats = [read_matrix(f, header=False)[1] for f in files]
    X = stack_networks(mats)
    _, Z = read_matrix(os.path.join(path, "side.csv"))
    y = read_labels(os.path.join(path, "labels.csv"), allow_unlabeled=True)
    n = X.shape[2]
    if Z.shape[0] != n or y.size != n:
        raise InvalidArgument(f"{n} networks but {Z.shape[0]} side rows and {y.size} labels")
    return X, Z, y


def write_network_stack(path, X, Z, y):
    os.makedirs(os.path.join(path, "networks"), exist_ok=True)
    n = X.shape[2]
    width = len(str(n - 1))
    for s in range(n):
        write_matrix(os.path.join(path, "networks", f"s{s:0{width}d}.csv"), X[:, :, s])
    write_matrix(os.path.join(path, "side.csv"), Z, [f"z{i + 1}" for i in range(Z.shape[1])])
    write_labels(os.path.join(path, "labels.csv"), y)
