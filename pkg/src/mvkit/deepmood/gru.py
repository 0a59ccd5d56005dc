"""Gated recurrent unit without bias terms, batched over equal-length sequences.

``r = sig(W_r x + U_r h)``, ``z = sig(W_z x + U_z h)``,
``h~ = tanh(W x + U (r * h))``, ``h' = z * h + (1 - z) * h~``, with ``h_0 = 0``.
"""
from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..errors import InvalidArgument

GATES = ("Wr", "Ur", "Wz", "Uz", "W", "U")


def sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def init_gru(rng, d_in, d_h, scale=None):
    """Uniform ``+-1/sqrt(d_h)`` initialization of the six matrices."""
    s = 1.0 / np.sqrt(d_h) if scale is None else scale
    params = {}
    for name in GATES:
        shape = (d_h, d_in) if name.startswith("W") else (d_h, d_h)
        params[name] = rng.uniform(-s, s, size=shape)
    return params


def _check(params, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1] == 0:
        raise InvalidArgument("sequence batch must be (batch, length >= 1, features)")
    d_h, d_in = params["W"].shape
    if X.shape[2] != d_in:
        raise InvalidArgument(f"sequence has {X.shape[2]} features, GRU expects {d_in}")
    return X


@dataclass
class GRUCache:
    X: np.ndarray
    h: np.ndarray   # (L + 1, B, d_h), h[0] = 0
    r: np.ndarray
    z: np.ndarray
    hc: np.ndarray  # candidate states


def gru_forward(params: Dict[str, np.ndarray], X, reverse=False):
    """Run the GRU over a batch ``X`` of shape ``(B, L, d)`` (or ``(L, d)``).

    Returns ``(states, final, cache)`` where ``states`` is ``(B, L, d_h)`` in
    processing order and ``final`` the last state. ``reverse`` processes the
    sequence back to front.
    """
    X = _check(params, X)
    if reverse:
        X = X[:, ::-1, :]
    B, L, _ = X.shape
    d_h = params["U"].shape[0]
    Wr, Ur, Wz, Uz, W, U = (params[g] for g in GATES)
    h = np.zeros((L + 1, B, d_h))
    r = np.empty((L, B, d_h))
    z = np.empty((L, B, d_h))
    hc = np.empty((L, B, d_h))
    for t in range(L):
        x, hp = X[:, t, :], h[t]
        r[t] = sigmoid(x @ Wr.T + hp @ Ur.T)
        z[t] = sigmoid(x @ Wz.T + hp @ Uz.T)
        hc[t] = np.tanh(x @ W.T + (r[t] * hp) @ U.T)
        h[t + 1] = z[t] * hp + (1.0 - z[t]) * hc[t]
    states = np.transpose(h[1:], (1, 0, 2))
    return states, h[L], GRUCache(X, h, r, z, hc)


def gru_backward(params, cache: GRUCache, d_final):
    """Gradients of the loss w.r.t. the six matrices given ``dL/d(final state)``."""
    X, h, r, z, hc = cache.X, cache.h, cache.r, cache.z, cache.hc
    Wr, Ur, Wz, Uz, W, U = (params[g] for g in GATES)
    grads = {g: np.zeros_like(params[g]) for g in GATES}
    dh = np.array(d_final, dtype=float)
    for t in range(X.shape[1] - 1, -1, -1):
        x, hp = X[:, t, :], h[t]
        dz = dh * (hp - hc[t])
        dhc = dh * (1.0 - z[t])
        dhp = dh * z[t]
        da = dhc * (1.0 - hc[t] ** 2)
        rh = r[t] * hp
        grads["W"] += da.T @ x
        grads["U"] += da.T @ rh
        drh = da @ U
        dr = drh * hp
        dhp += drh * r[t]
        daz = dz * z[t] * (1.0 - z[t])
        grads["Wz"] += daz.T @ x
        grads["Uz"] += daz.T @ hp
        dhp += daz @ Uz
        dar = dr * r[t] * (1.0 - r[t])
        grads["Wr"] += dar.T @ x
        grads["Ur"] += dar.T @ hp
        dhp += dar @ Ur
        dh = dhp
    return grads
