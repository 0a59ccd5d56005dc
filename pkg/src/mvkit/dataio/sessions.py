import json

import numpy as np

from ..deepmood.model import SessionInstance
from ..errors import InvalidArgument, ParseError
from ._csv import require_file

HDRS_CUTOFF = 8  # scores 0..7 negative, 8 and above positive


def dichotomize_hdrs(score):
    if score < 0:
        raise InvalidArgument(f"HDRS score must be nonnegative, got {score}")
    return 1 if score >= HDRS_CUTOFF else 0


def _view(raw, path, ln, p):
    """``[[t, x1, ..., xd], ...]`` -> ``(times, features)``."""
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"view {p} is not a rectangular numeric array", path, ln) from None
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ParseError(f"view {p} rows must be [t, x1, ..., xd]", path, ln)
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"view {p} contains non-finite values", path, ln)
    if np.any(np.diff(arr[:, 0]) < 0):
        raise ParseError(f"view {p} timestamps are not in chronological order", path, ln)
    return arr[:, 0], arr[:, 1:]


def load_sessions(path, min_len=10, max_len=100, target="label"):
    """Line-delimited JSON sessions.

    Each object has ``id``, ``views`` (list of per-view ``[[t, x...], ...]``)
    and the target field: ``label`` (class index), ``hdrs`` (dichotomized at
    8) or ``score`` (regression). Views longer than ``max_len`` keep their
    first ``max_len`` steps; sessions with any view shorter than ``min_len``
    are dropped.
    """
    if target not in ("label", "hdrs", "score"):
        raise InvalidArgument("target must be label, hdrs or score")
    if not 1 <= min_len <= max_len:
        raise InvalidArgument("need 1 <= min_len <= max_len")
    require_file(path)
    out = []
    dims = None
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path, ln) from None
            if not isinstance(obj, dict) or "views" not in obj or target not in obj:
                raise ParseError(f"session needs 'views' and '{target}'", path, ln)
            views = [_view(v, path, ln, p)[1] for p, v in enumerate(obj["views"])]
            d = [v.shape[1] for v in views]
            if dims is None:
                dims = d
            elif d != dims:
                raise ParseError(f"view widths {d} differ from earlier sessions {dims}", path, ln)
            val = obj[target]
            if not isinstance(val, (int, float)) or not np.isfinite(val):
                raise ParseError(f"'{target}' must be a finite number", path, ln)
            if target == "hdrs":
                y = float(dichotomize_hdrs(val))
            elif target == "label":
                if val != int(val) or val < 0:
                    raise ParseError("'label' must be a nonnegative class index", path, ln)
                y = float(val)
            else:
                y = float(val)
            if any(v.shape[0] < min_len for v in views):
                continue
            views = [v[:max_len] for v in views]
            out.append(SessionInstance(views, y, str(obj.get("id", ln))))
    return out


def write_sessions(instances, path, target="label"):
    with open(path, "w") as fh:
        for inst in instances:
            views = [np.hstack([np.arange(v.shape[0])[:, None], v]).tolist() for v in inst.views]
            val = int(inst.y) if target == "label" else float(inst.y)
            fh.write(json.dumps({"id": inst.id, "views": views, target: val}) + "\n")
