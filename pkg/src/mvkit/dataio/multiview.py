import glob
import os

import numpy as np

from ..errors import InvalidArgument
from ..mvfs import MultiViewDataset
from ._csv import read_labels, read_matrix, require_dir, write_labels, write_matrix


def minmax_normalize(M):
    """Scale each column to ``[0, 1]``; constant columns map to 0."""
    M = np.asarray(M, dtype=float)
    lo, hi = M.min(axis=0), M.max(axis=0)
    span = hi - lo
    out = np.zeros_like(M)
    ok = span > 0
    out[:, ok] = (M[:, ok] - lo[ok]) / span[ok]
    return out


def load_multiview(path, normalize=True):
    """Directory of view CSVs (instances x features, header row) plus ``labels.csv``.

    Views are the other ``*.csv`` files in lexicographic order of file name.
    """
    require_dir(path)
    y = read_labels(os.path.join(path, "labels.csv"))
    files = sorted(f for f in glob.glob(os.path.join(path, "*.csv"))
                   if os.path.basename(f) != "labels.csv")
    if len(files) < 2:
        raise InvalidArgument(f"{path} must contain at least two view CSVs")
    views, names, feats = [], [], []
    for f in files:
        cols, M = read_matrix(f)
        if M.shape[1] == 0 or not cols:
            raise InvalidArgument(f"{f} has no features")
        if M.shape[0] != y.size:
            raise InvalidArgument(f"{f} has {M.shape[0]} rows but labels.csv has {y.size}")
        views.append((minmax_normalize(M) if normalize else M).T)
        names.append(os.path.splitext(os.path.basename(f))[0])
        feats.append(cols)
    return MultiViewDataset(views, y, names, feats)


def write_multiview(ds, path):
    os.makedirs(path, exist_ok=True)
    for name, X, cols in zip(ds.names, ds.views, ds.feature_names):
        write_matrix(os.path.join(path, f"{name}.csv"), X.T, cols)
    write_labels(os.path.join(path, "labels.csv"), ds.y)
