"""Late-fusion heads mapping concatenated view encodings to class scores.

Batched forms operate on ``H`` of shape ``(N, d_c)`` (views concatenated in
declaration order) and return scores ``(N, c)``.
"""
import numpy as np

from ..errors import InvalidArgument

VARIANTS = ("fc", "fm", "mvm")


def _aug(H):
    return np.hstack([H, np.ones((H.shape[0], 1))])


def init_head(rng, variant, view_dims, d_k, c, zero=False):
    """Head parameters. ``view_dims`` are the per-view encoding widths.

    For ``fc`` the hidden width is ``c * d_k`` so that all variants have a
    comparable parameter budget.
    """
    if variant not in VARIANTS:
        raise InvalidArgument(f"unknown head {variant!r}; choose from {VARIANTS}")
    d_c = int(sum(view_dims))
    draw = (lambda shape, fan: np.zeros(shape)) if zero else (
        lambda shape, fan: rng.normal(0.0, 1.0 / np.sqrt(fan), size=shape))
    if variant == "fc":
        hid = c * d_k
        return {"W1": draw((hid, d_c + 1), d_c + 1), "W2": draw((c, hid), hid)}
    if variant == "fm":
        return {"Ufm": draw((c, d_k, d_c), d_c), "wfm": draw((c, d_c + 1), d_c + 1)}
    if len(view_dims) < 2:
        raise InvalidArgument("the mvm head needs at least two views")
    return {f"Umvm{p}": draw((c, d_k, d + 1), d + 1) for p, d in enumerate(view_dims)}


def param_count(variant, c, d_k, d_c, m):
    """Closed-form parameter count of a head."""
    if variant == "mvm":
        return c * d_k * (d_c + m)
    if variant == "fm":
        return c * d_k * d_c + c * (d_c + 1)
    if variant == "fc":
        hid = c * d_k
        return hid * (d_c + c + 1)
    raise InvalidArgument(f"unknown head {variant!r}")


def fc_forward(params, H):
    A = _aug(H) @ params["W1"].T
    R = np.maximum(A, 0.0)
    return R @ params["W2"].T, (H, A, R)


def fc_backward(params, cache, dY):
    H, A, R = cache
    dW2 = dY.T @ R
    dA = (dY @ params["W2"]) * (A > 0)
    dW1 = dA.T @ _aug(H)
    dH = dA @ params["W1"][:, :-1]
    return {"W1": dW1, "W2": dW2}, dH


def fm_forward(params, H):
    U, w = params["Ufm"], params["wfm"]
    Q = np.einsum("akd,nd->nak", U, H)
    Y = np.sum(Q * Q, axis=2) + _aug(H) @ w.T
    return Y, (H, Q)


def fm_backward(params, cache, dY):
    H, Q = cache
    U, w = params["Ufm"], params["wfm"]
    dQ = 2.0 * Q * dY[:, :, None]
    dU = np.einsum("nak,nd->akd", dQ, H)
    dw = dY.T @ _aug(H)
    dH = np.einsum("nak,akd->nd", dQ, U) + dY @ w[:, :-1]
    return {"Ufm": dU, "wfm": dw}, dH


def _split(H, view_dims):
    edges = np.cumsum([0] + list(view_dims))
    return [H[:, edges[p]:edges[p + 1]] for p in range(len(view_dims))]


def mvm_forward(params, H, view_dims):
    parts = _split(H, view_dims)
    Qs = [np.einsum("akd,nd->nak", params[f"Umvm{p}"], _aug(hp)) for p, hp in enumerate(parts)]
    prod = np.ones_like(Qs[0])
    for Q in Qs:
        prod = prod * Q
    return prod.sum(axis=2), (parts, Qs)


def mvm_backward(params, cache, dY, view_dims):
    parts, Qs = cache
    m = len(Qs)
    grads = {}
    dHs = []
    for p in range(m):
        others = np.ones_like(Qs[0])
        for j in range(m):
            if j != p:
                others = others * Qs[j]
        dQ = others * dY[:, :, None]
        grads[f"Umvm{p}"] = np.einsum("nak,nd->akd", dQ, _aug(parts[p]))
        dHs.append(np.einsum("nak,akd->nd", dQ, params[f"Umvm{p}"][:, :, :-1]))
    return grads, np.hstack(dHs)


def head_forward(variant, params, H, view_dims):
    if variant == "fc":
        return fc_forward(params, H)
    if variant == "fm":
        return fm_forward(params, H)
    if variant == "mvm":
        return mvm_forward(params, H, view_dims)
    raise InvalidArgument(f"unknown head {variant!r}")


def head_backward(variant, params, cache, dY, view_dims):
    if variant == "fc":
        return fc_backward(params, cache, dY)
    if variant == "fm":
        return fm_backward(params, cache, dY)
    return mvm_backward(params, cache, dY, view_dims)


def fc_head(h, params):
    """Scores for one concatenated encoding ``h``."""
    if "W1" not in params:
        raise InvalidArgument("parameters are not an fc head")
    return fc_forward(params, np.atleast_2d(np.asarray(h, dtype=float)))[0][0]


def fm_head(h, params, a):
    """Score of class ``a`` for one encoding ``h``."""
    if "Ufm" not in params:
        raise InvalidArgument("parameters are not an fm head")
    h = np.asarray(h, dtype=float).ravel()
    q = params["Ufm"][a] @ h
    return float(q @ q + params["wfm"][a] @ np.append(h, 1.0))


def mvm_head(h_views, params, a):
    """Score of class ``a`` from the list of per-view encodings."""
    keys = [f"Umvm{p}" for p in range(len(h_views))]
    if len(h_views) < 2 or any(k not in params for k in keys):
        raise InvalidArgument("parameters are not an mvm head for this many views")
    prod = None
    for k, hp in zip(keys, h_views):
        q = params[k][a] @ np.append(np.asarray(hp, dtype=float).ravel(), 1.0)
        prod = q if prod is None else prod * q
    return float(prod.sum())
