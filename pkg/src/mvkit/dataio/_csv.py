import csv
import os

import numpy as np

from ..errors import InvalidArgument, ParseError


def require_file(path):
    if not os.path.isfile(path):
        raise InvalidArgument(f"file not found: {path}")


def require_dir(path):
    if not os.path.isdir(path):
        raise InvalidArgument(f"directory not found: {path}")


def parse_float(text, path, line):
    try:
        val = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", path, line) from None
    if not np.isfinite(val):
        raise ParseError(f"non-finite value {text!r}", path, line)
    return val


def read_matrix(path, header=True):
    """Numeric CSV as ``(column names or None, float matrix)``."""
    require_file(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = None
    start = 0
    if not rows:
        raise InvalidArgument(f"{path} is empty")
    if header:
        names = [c.strip() for c in rows[0]]
        start = 1
    data = []
    for ln, row in enumerate(rows[start:], start=start + 1):
        if not row or all(not c.strip() for c in row):
            continue
        width = len(names) if names is not None else (len(data[0]) if data else len(row))
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", path, ln)
        data.append([parse_float(c.strip(), path, ln) for c in row])
    if names is not None and not names or (names is None and not data):
        raise InvalidArgument(f"{path} has no columns")
    ncol = len(names) if names is not None else len(data[0])
    return names, np.array(data, dtype=float).reshape(len(data), ncol)


def write_matrix(path, M, names=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if names is not None:
            w.writerow(names)
        for row in np.asarray(M, dtype=float):
            w.writerow([repr(float(v)) for v in row])


def read_labels(path, allow_unlabeled=False):
    """Single-column label file with header ``label``; ``?`` marks unlabeled."""
    require_file(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["label"]:
        raise ParseError("header must be 'label'", path, 1)
    out = []
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 1:
            raise ParseError(f"expected 1 field, found {len(row)}", path, ln)
        text = row[0].strip()
        if text == "?":
            if not allow_unlabeled:
                raise ParseError("unlabeled instance not allowed here", path, ln)
            out.append(np.nan)
        else:
            out.append(parse_float(text, path, ln))
    return np.array(out, dtype=float)


def write_labels(path, y):
    with open(path, "w", newline="") as fh:
        fh.write("label\n")
        for v in np.asarray(y, dtype=float):
            fh.write("?\n" if np.isnan(v) else f"{v:g}\n")
