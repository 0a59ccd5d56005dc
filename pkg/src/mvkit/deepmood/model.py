"""End-to-end multi-view sequence classifier: bidirectional GRU per view plus a fusion head."""
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import InvalidArgument, StateError
from .gru import GATES, gru_backward, gru_forward, init_gru
from .heads import VARIANTS, head_backward, head_forward, init_head, param_count


@dataclass
class SessionInstance:
    """``views[p]`` is an ``(l_p, d_p)`` array in chronological order."""

    views: List[np.ndarray]
    y: float
    id: str = ""

    def __post_init__(self):
        self.views = [np.asarray(v, dtype=float) for v in self.views]
        for p, v in enumerate(self.views):
            if v.ndim != 2 or v.shape[0] == 0:
                raise InvalidArgument(f"view {p} must be a nonempty (length, features) array")


@dataclass
class TrainConfig:
    head: str = "mvm"
    d_h: int = 8
    d_k: int = 8
    epochs: int = 500
    batch: int = 256
    lr: float = 1e-3
    dropout: float = 0.1
    decay: float = 0.9
    eps: float = 1e-8
    bidirectional: bool = True
    task: str = "classification"
    init: str = "random"
    seed: int = 0
    stop_at_train_accuracy: Optional[float] = None

    def __post_init__(self):
        if self.head not in VARIANTS:
            raise InvalidArgument(f"unknown head {self.head!r}; choose from {VARIANTS}")
        for name in ("d_h", "d_k", "epochs", "batch"):
            if getattr(self, name) < 1:
                raise InvalidArgument(f"{name} must be positive")
        if not self.lr > 0 or not self.eps > 0:
            raise InvalidArgument("lr and eps must be positive")
        if not 0 <= self.dropout < 1:
            raise InvalidArgument("dropout must lie in [0, 1)")
        if not 0 < self.decay < 1:
            raise InvalidArgument("decay must lie in (0, 1)")
        if self.task not in ("classification", "regression"):
            raise InvalidArgument("task must be classification or regression")
        if self.init not in ("random", "zero"):
            raise InvalidArgument("init must be random or zero")


@dataclass
class MoodModel:
    cfg: TrainConfig
    input_dims: List[int]
    c: int
    params: Dict[str, np.ndarray]
    history: List[dict] = field(default_factory=list)
    best_params: Optional[Dict[str, np.ndarray]] = None
    best_epoch: Optional[int] = None
    fitted: bool = False

    @property
    def dirs(self):
        return 2 if self.cfg.bidirectional else 1

    @property
    def view_dims(self):
        return [self.cfg.d_h * self.dirs] * len(self.input_dims)

    @property
    def d_c(self):
        return sum(self.view_dims)

    def head_param_count(self):
        return param_count(self.cfg.head, self.c, self.cfg.d_k, self.d_c, len(self.input_dims))

    def param_names(self):
        return list(self.params)


def init_model(input_dims, c, cfg: TrainConfig, rng=None):
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    params = {}
    dirs = ("fwd", "bwd") if cfg.bidirectional else ("fwd",)
    for p, d in enumerate(input_dims):
        for direction in dirs:
            gru = init_gru(rng, d, cfg.d_h)
            for g in GATES:
                params[f"gru{p}.{direction}.{g}"] = (
                    np.zeros_like(gru[g]) if cfg.init == "zero" else gru[g])
    head = init_head(rng, cfg.head, [cfg.d_h * len(dirs)] * len(input_dims), cfg.d_k, c,
                     zero=cfg.init == "zero")
    params.update(head)
    return MoodModel(cfg=cfg, input_dims=list(input_dims), c=c, params=params)


def _gru_params(params, p, direction):
    return {g: params[f"gru{p}.{direction}.{g}"] for g in GATES}


def _head_params(model, params):
    keys = [k for k in params if not k.startswith("gru")]
    return {k: params[k] for k in keys}


def _encode(model, params, instances):
    """Concatenated final states ``(N, d_c)`` plus caches for backprop.

    Sequences of equal length are batched together; no padding is used.
    """
    N = len(instances)
    dirs = ("fwd", "bwd") if model.cfg.bidirectional else ("fwd",)
    d_h = model.cfg.d_h
    blocks = []
    caches = []
    for p, d in enumerate(model.input_dims):
        Hp = np.zeros((N, d_h * len(dirs)))
        groups = defaultdict(list)
        for i, inst in enumerate(instances):
            x = inst.views[p]
            if x.shape[1] != d:
                raise InvalidArgument(f"view {p} of {inst.id or i} has {x.shape[1]} features, expected {d}")
            groups[x.shape[0]].append(i)
        for length in sorted(groups):
            idx = groups[length]
            X = np.stack([instances[i].views[p] for i in idx])
            for k, direction in enumerate(dirs):
                _, final, cache = gru_forward(_gru_params(params, p, direction), X,
                                              reverse=direction == "bwd")
                Hp[idx, k * d_h:(k + 1) * d_h] = final
                caches.append((p, direction, k, idx, cache))
        blocks.append(Hp)
    return np.hstack(blocks), caches


def _loss(model, Y, targets):
    """Mean loss and its gradient w.r.t. the scores."""
    N = Y.shape[0]
    if model.cfg.task == "classification":
        Z = Y - Y.max(axis=1, keepdims=True)
        P = np.exp(Z)
        P /= P.sum(axis=1, keepdims=True)
        t = targets.astype(int)
        loss = -np.mean(np.log(np.maximum(P[np.arange(N), t], 1e-300)))
        dY = P.copy()
        dY[np.arange(N), t] -= 1.0
        return float(loss), dY / N
    resid = Y[:, 0] - targets
    return float(np.mean(resid ** 2)), (2.0 * resid / N)[:, None]


def loss_and_grads(model, instances, params=None, rng=None, dropout=None):
    """Mean loss and gradients for every parameter.

    Dropout is applied to the encodings (inverted scaling) only when ``rng``
    is given and the rate is positive.
    """
    params = model.params if params is None else params
    rate = model.cfg.dropout if dropout is None else dropout
    H, caches = _encode(model, params, instances)
    mask = None
    if rng is not None and rate > 0:
        mask = (rng.random(H.shape) >= rate) / (1.0 - rate)
        H = H * mask
    head = _head_params(model, params)
    Y, hcache = head_forward(model.cfg.head, head, H, model.view_dims)
    targets = np.array([inst.y for inst in instances], dtype=float)
    loss, dY = _loss(model, Y, targets)
    grads, dH = head_backward(model.cfg.head, head, hcache, dY, model.view_dims)
    if mask is not None:
        dH = dH * mask
    d_h = model.cfg.d_h
    width = d_h * model.dirs
    for name in params:
        if name.startswith("gru"):
            grads[name] = np.zeros_like(params[name])
    for p, direction, k, idx, cache in caches:
        col = p * width + k * d_h
        g = gru_backward(_gru_params(params, p, direction), cache, dH[idx, col:col + d_h])
        for gate, val in g.items():
            grads[f"gru{p}.{direction}.{gate}"] += val
    return loss, grads


def scores(model, instances, params=None):
    params = model.params if params is None else params
    H, _ = _encode(model, params, instances)
    return head_forward(model.cfg.head, _head_params(model, params), H, model.view_dims)[0]


def predict(model, instances, params=None):
    """Class indices (classification) or raw scores (regression); no dropout."""
    if not model.fitted:
        raise StateError("model is not fitted")
    if not instances:
        return np.zeros(0)
    Y = scores(model, instances, params)
    if model.cfg.task == "classification":
        return np.argmax(Y, axis=1)
    return Y[:, 0]


def _metrics(model, instances, params):
    Y = scores(model, instances, params)
    t = np.array([inst.y for inst in instances], dtype=float)
    loss, _ = _loss(model, Y, t)
    if model.cfg.task == "classification":
        return {"loss": loss, "accuracy": float(np.mean(np.argmax(Y, axis=1) == t))}
    return {"loss": loss, "rmse": float(np.sqrt(np.mean((Y[:, 0] - t) ** 2)))}


def _n_classes(instances, task):
    y = np.array([inst.y for inst in instances], dtype=float)
    if task == "regression":
        return 1
    if not np.all(y == np.round(y)) or y.min() < 0:
        raise InvalidArgument("classification labels must be nonnegative class indices")
    c = int(y.max()) + 1
    if np.unique(y).size < 2:
        raise InvalidArgument("classification needs at least two classes")
    return max(c, 2)


def train(instances: Sequence[SessionInstance], cfg: TrainConfig = None,
          validation: Optional[Sequence[SessionInstance]] = None):
    """Fit with RMSprop on shuffled mini-batches; deterministic given ``cfg.seed``.

    ``history`` holds one dict per epoch with the training-batch loss and the
    dropout-free training (and validation) metrics. ``best_params`` keeps the
    weights of the best validation epoch when a validation set is given.
    """
    cfg = cfg or TrainConfig()
    instances = list(instances)
    if not instances:
        raise InvalidArgument("empty training set")
    m = len(instances[0].views)
    if any(len(inst.views) != m for inst in instances):
        raise InvalidArgument("instances disagree on the number of views")
    input_dims = [v.shape[1] for v in instances[0].views]
    rng = np.random.default_rng(cfg.seed)
    model = init_model(input_dims, _n_classes(instances, cfg.task), cfg, rng)
    cache = {k: np.zeros_like(v) for k, v in model.params.items()}
    n = len(instances)
    best = None
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch):
            batch = [instances[i] for i in order[start:start + cfg.batch]]
            loss, grads = loss_and_grads(model, batch, rng=rng)
            batch_losses.append(loss * len(batch))
            for k, g in grads.items():
                cache[k] = cfg.decay * cache[k] + (1.0 - cfg.decay) * g * g
                model.params[k] = model.params[k] - cfg.lr * g / (np.sqrt(cache[k]) + cfg.eps)
        record = {"epoch": epoch, "batch_loss": float(sum(batch_losses) / n)}
        for key, val in _metrics(model, instances, model.params).items():
            record[f"train_{key}"] = val
        if validation:
            for key, val in _metrics(model, list(validation), model.params).items():
                record[f"val_{key}"] = val
            score = record.get("val_accuracy", -record.get("val_rmse", 0.0))
            if best is None or score > best:
                best = score
                model.best_params = {k: v.copy() for k, v in model.params.items()}
                model.best_epoch = epoch
        model.history.append(record)
        target = cfg.stop_at_train_accuracy
        if target is not None and record.get("train_accuracy", -1.0) >= target:
            break
    model.fitted = True
    return model
