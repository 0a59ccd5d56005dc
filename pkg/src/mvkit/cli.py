"""Command-line front end: ``mvkit {mvfs,mine,bne,mood,selftest}``.

Configuration precedence is ``--param``/``--seed`` flags, then the
``--config`` JSON file, then built-in defaults. Every command writes
``report.json`` (schema 1) echoing the resolved configuration. Exit codes:
0 success, 1 validation error, 2 convergence failure.
"""
import argparse
import copy
import datetime
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import (ConvergenceFailure, DegenerateInput, InvalidArgument, ParseError,
                     SingularMatrix)

DEFAULTS = {
    "mvfs": {
        "input": None, "seed": 0, "n": 50, "dims": [10, 10], "select": None, "C": 1.0,
        "kernel": "linear", "bandwidth": None, "alternations": 3, "chunk": 1,
        "folds": 3, "balanced": False,
    },
    "mine": {
        "input": None, "sideviews": None, "edge_threshold": None, "seed": 0, "n": 8,
        "k": 10, "min_sup": 2, "max_edges": 4, "prune": True, "lambdas": None,
        "kernel": "rbf", "bandwidth": None, "export_features": True, "classify": True,
        "C": 1.0, "folds": 3, "balanced": False,
    },
    "bne": {
        "input": None, "seed": 0, "m": 8, "n": 40, "noise": 0.0, "k": 3, "alpha": 0.1,
        "beta": 0.1, "gamma": 0.25, "tol": 1e-4, "max_iter": 500, "folds": 3,
    },
    "mood": {
        "input": None, "seed": 0, "n": 32, "target": "label", "head": "mvm", "d_h": 8,
        "d_k": 8, "epochs": 500, "batch": 256, "lr": 1e-3, "dropout": 0.1,
        "bidirectional": True, "min_len": 10, "max_len": 100, "val_fraction": 0.2,
    },
    "selftest": {"seed": 0},
}


class UsageError(InvalidArgument):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- configuration

def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _check_type(key, value, default):
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise InvalidArgument(f"{key} must be true or false")
    elif isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidArgument(f"{key} must be an integer")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidArgument(f"{key} must be a number")
        value = float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise InvalidArgument(f"{key} must be a string")
    elif isinstance(default, list):
        if not isinstance(value, list):
            raise InvalidArgument(f"{key} must be a list")
    return value


def resolve_config(command, config_file=None, params=(), seed=None, input_path=None):
    cfg = copy.deepcopy(DEFAULTS[command])
    layers = []
    if config_file is not None:
        if not os.path.isfile(config_file):
            raise InvalidArgument(f"config file not found: {config_file}")
        with open(config_file) as fh:
            try:
                layer = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", config_file, exc.lineno) from None
        if not isinstance(layer, dict):
            raise InvalidArgument(f"{config_file} must hold a JSON object")
        layers.append(layer)
    flags = {}
    for item in params:
        if "=" not in item:
            raise InvalidArgument(f"--param expects key=value, got {item!r}")
        key, text = item.split("=", 1)
        flags[key.strip()] = _parse_value(text)
    if seed is not None:
        flags["seed"] = seed
    if input_path is not None:
        flags["input"] = input_path
    layers.append(flags)
    for layer in layers:
        for key, value in layer.items():
            if key not in cfg:
                raise InvalidArgument(
                    f"unknown config key {key!r} for {command}; known: {sorted(cfg)}")
            cfg[key] = _check_type(key, value, DEFAULTS[command][key])
    return cfg


# ---------------------------------------------------------------- evaluation helpers

def _hash_key(seed, i):
    return hashlib.sha256(f"{seed}:{i}".encode()).hexdigest()


def stratified_folds(y, n_folds, seed):
    """Fold index per instance: classes are dealt round-robin in seeded hash order."""
    y = np.asarray(y)
    if n_folds < 2:
        raise InvalidArgument("need at least two folds")
    folds = np.empty(y.size, dtype=int)
    for cls in np.unique(y):
        idx = sorted(np.flatnonzero(y == cls), key=lambda i: _hash_key(seed, int(i)))
        for r, i in enumerate(idx):
            folds[i] = r % n_folds
    return folds


def balanced_subsample(y, seed):
    """Indices keeping every minority instance and an equal-sized seeded sample of the others."""
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    keep = []
    rng = np.random.default_rng(seed)
    for cls in classes:
        idx = np.flatnonzero(y == cls)
        keep.extend(rng.choice(idx, size=counts.min(), replace=False) if idx.size > counts.min() else idx)
    return np.sort(np.asarray(keep, dtype=int))


def _mean_metrics(rows):
    keys = [k for k in rows[0] if k != "undefined"]
    return {k: float(np.mean([r[k] for r in rows])) for k in keys}


# ---------------------------------------------------------------- commands

def cmd_mvfs(cfg):
    from .dataio import load_multiview, synth_multiview
    from .mvfs import predict, tmvfs_select
    from .numkit import KernelSpec, classification_metrics

    ds = load_multiview(cfg["input"]) if cfg["input"] else synth_multiview(
        cfg["seed"], n=cfg["n"], dims=tuple(cfg["dims"]))
    if cfg["balanced"]:
        ds = ds.subset(balanced_subsample(ds.y, cfg["seed"]))
    targets = cfg["select"] or [int(math.ceil(X.shape[0] / 2)) for X in ds.views]
    spec = KernelSpec(cfg["kernel"], cfg["bandwidth"])
    opts = dict(C=cfg["C"], spec=spec, alternations=cfg["alternations"], chunk=cfg["chunk"])
    state = tmvfs_select(ds, targets, **opts)
    folds = stratified_folds(ds.y, cfg["folds"], cfg["seed"])
    rows = []
    for f in range(cfg["folds"]):
        tr, te = np.flatnonzero(folds != f), np.flatnonzero(folds == f)
        st = tmvfs_select(ds.subset(tr), targets, **opts)
        pred = predict(st, [X[:, te] for X in ds.views])
        rows.append(classification_metrics(pred, ds.y[te]))
    report = state.report(ds.names)
    for v, view in enumerate(report["views"]):
        view["selected_names"] = [ds.feature_names[v][i] for i in state.selected[v]]
    return {"selection": report, "cv": {"folds": rows, "mean": _mean_metrics(rows)}}, {}


def cmd_mine(cfg):
    from .dataio import load_graph_corpus, synth_graph_corpus
    from .numkit import KernelSpec, classification_metrics, svm_train
    from .subgraph import GraphCorpus, SideViewSet, feature_matrix, gmsv_mine

    if cfg["input"]:
        corpus, sides = load_graph_corpus(cfg["input"], cfg["edge_threshold"], cfg["sideviews"])
    else:
        corpus, sides, _ = synth_graph_corpus(cfg["seed"], n=cfg["n"])
    if sides is not None:
        sides = SideViewSet(sides.views, cfg["lambdas"] or sides.lambdas,
                            KernelSpec(cfg["kernel"], cfg["bandwidth"]), sides.names)
    if cfg["balanced"]:
        lab = np.flatnonzero(corpus.y != 0)
        keep = np.sort(np.concatenate([lab[balanced_subsample(corpus.y[lab], cfg["seed"])],
                                       np.flatnonzero(corpus.y == 0)]))
        corpus = GraphCorpus([corpus.graphs[i] for i in keep], corpus.y[keep],
                             [corpus.ids[i] for i in keep])
        if sides is not None:
            sides = SideViewSet([Z[keep] for Z in sides.views], sides.lambdas, sides.kernel,
                                sides.names)
    opts = dict(k=cfg["k"], min_sup=cfg["min_sup"], max_edges=cfg["max_edges"],
                prune=cfg["prune"])
    result = gmsv_mine(corpus, sides, **opts)
    out = {"mining": result.report(), "graph_ids": list(corpus.ids)}
    files = {}
    if cfg["export_features"]:
        F = feature_matrix(result.patterns, corpus)
        lines = ["id," + ",".join(f"p{i + 1}" for i in range(F.shape[0]))]
        lines += [gid + "," + ",".join(str(int(v)) for v in F[:, j])
                  for j, gid in enumerate(corpus.ids)]
        files["features.csv"] = "\n".join(lines) + "\n"
    lab = np.flatnonzero(corpus.y != 0)
    y = corpus.y[lab]
    if cfg["classify"] and np.unique(y).size == 2 and min(np.sum(y > 0), np.sum(y < 0)) >= cfg["folds"]:
        folds = stratified_folds(y, cfg["folds"], cfg["seed"])
        rows = []
        for f in range(cfg["folds"]):
            tr, te = lab[folds != f], lab[folds == f]
            yy = corpus.y.copy()
            yy[te] = 0  # held-out graphs stay in the corpus unlabeled
            train_corpus = GraphCorpus(corpus.graphs, yy, corpus.ids)
            pats = gmsv_mine(train_corpus, sides, **opts).patterns
            F = feature_matrix(pats, corpus).T.astype(float)
            sol = svm_train(F[tr], corpus.y[tr], C=cfg["C"])
            pred = np.where(sol.decision(F[te]) >= 0, 1, -1)
            rows.append(classification_metrics(pred, corpus.y[te]))
        out["classification"] = {"folds": rows, "mean": _mean_metrics(rows)}
    else:
        out["classification"] = "skipped: needs both classes with at least one graph per fold"
    return out, files


def cmd_bne(cfg):
    from .bne import (BNEConfig, GuidanceKernel, explained_variation, tbne_embed_predict,
                      tbne_fit)
    from .dataio import load_network_stack, save_model, synth_planted_tensor

    if cfg["input"]:
        X, Z, y = load_network_stack(cfg["input"])
    else:
        planted = synth_planted_tensor(cfg["seed"], m=cfg["m"], n=cfg["n"], k=cfg["k"],
                                       noise=cfg["noise"])
        X, Z, y = planted.X, planted.Z, planted.y
    bcfg = BNEConfig(k=cfg["k"], alpha=cfg["alpha"], beta=cfg["beta"], gamma=cfg["gamma"],
                     tol=cfg["tol"], max_iter=cfg["max_iter"], seed=cfg["seed"])
    guide = GuidanceKernel.from_features(Z)
    known = np.flatnonzero(~np.isnan(y))
    classes = np.unique(y[known])
    if classes.size and not np.all(np.isin(classes, (-1.0, 1.0))):
        raise InvalidArgument("subject labels must be -1, +1 or ?")

    def onehot(idx):
        return np.stack([y[idx] < 0, y[idx] > 0], axis=1).astype(float)

    model = tbne_fit(X, guide, onehot(known), bcfg, labeled=known)
    ev = explained_variation(X, model.reconstruct())
    out = {"fit": {"converged": bool(model.converged), "iterations": int(model.n_iter),
                   "explained_variation": ev, "final_mu": float(model.mu),
                   "orthogonality_error": float(np.linalg.norm(model.S.T @ model.S - np.eye(bcfg.k))),
                   "consensus_gap": float(np.linalg.norm(model.P - model.B) / np.linalg.norm(model.B))}}
    if classes.size == 2 and min(np.sum(y[known] > 0), np.sum(y[known] < 0)) >= cfg["folds"]:
        folds = stratified_folds(y[known], cfg["folds"], cfg["seed"])
        rows = []
        for f in range(cfg["folds"]):
            tr, te = known[folds != f], known[folds == f]
            m = tbne_fit(X, guide, onehot(tr), bcfg, labeled=tr)
            _, pred = tbne_embed_predict(m, te)
            acc = float(np.mean(np.where(pred == 1, 1.0, -1.0) == y[te]))
            rows.append({"accuracy": acc, "converged": bool(m.converged)})
        out["cv"] = {"folds": rows, "mean_accuracy": float(np.mean([r["accuracy"] for r in rows]))}
    else:
        out["cv"] = "skipped: needs both classes with at least one subject per fold"
    N = model.node_factors
    emb = ["subject," + ",".join(f"s{r + 1}" for r in range(bcfg.k))]
    emb += [f"{i}," + ",".join(repr(float(v)) for v in row) for i, row in enumerate(model.S)]
    files = {"embedding.csv": "\n".join(emb) + "\n",
             "model.bin": ("bne", {"B": N, "S": model.S, "W": model.W,
                                   "P": model.P, "U": model.U})}
    return out, files


def cmd_mood(cfg):
    from .dataio import load_sessions, synth_sessions
    from .deepmood import TrainConfig, predict, train

    if cfg["input"]:
        data = load_sessions(cfg["input"], cfg["min_len"], cfg["max_len"], cfg["target"])
    else:
        data = synth_sessions(cfg["seed"], n=cfg["n"])
    if len(data) < 2:
        raise InvalidArgument("fewer than two sessions survive the length rules")
    task = "regression" if cfg["target"] == "score" else "classification"
    y = np.array([s.y for s in data])
    if not 0 < cfg["val_fraction"] < 1:
        raise InvalidArgument("val_fraction must lie in (0, 1)")
    n_folds = max(2, int(round(1.0 / cfg["val_fraction"])))
    groups = stratified_folds(y if task == "classification" else np.zeros(y.size), n_folds,
                              cfg["seed"])
    train_set = [s for s, g in zip(data, groups) if g != 0]
    val_set = [s for s, g in zip(data, groups) if g == 0]
    tcfg = TrainConfig(head=cfg["head"], d_h=cfg["d_h"], d_k=cfg["d_k"], epochs=cfg["epochs"],
                       batch=cfg["batch"], lr=cfg["lr"], dropout=cfg["dropout"],
                       bidirectional=cfg["bidirectional"], task=task, seed=cfg["seed"])
    model = train(train_set, tcfg, validation=val_set)
    final = model.history[-1]
    best = model.history[model.best_epoch - 1] if model.best_epoch else final
    out = {"n_train": len(train_set), "n_validation": len(val_set),
           "head_parameters": int(model.head_param_count()),
           "final_epoch": final, "best_validation_epoch": best}
    if task == "classification":
        out["validation_predictions"] = [int(v) for v in predict(model, val_set)]
    keys = list(model.history[0])
    lines = [",".join(keys)] + [",".join(repr(r[k]) for k in keys) for r in model.history]
    files = {"epochs.csv": "\n".join(lines) + "\n",
             "model.bin": ("mood", dict(model.params))}
    return out, files


def cmd_selftest(cfg):
    from .selftest import run_all

    results = run_all(verbose=True)
    failed = [r.name for r in results if not r.passed]
    out = {"criteria": [r.as_dict() for r in results], "failed": failed}
    return out, {}


COMMANDS = {"mvfs": cmd_mvfs, "mine": cmd_mine, "bne": cmd_bne, "mood": cmd_mood,
            "selftest": cmd_selftest}


# ---------------------------------------------------------------- entry point

def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_outputs(out_dir, command, cfg, results, files):
    from .dataio import save_model

    os.makedirs(out_dir, exist_ok=True)
    report = {"schema": 1, "command": command, "version": __version__, "config": cfg,
              "results": results,
              "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    for name, content in files.items():
        path = os.path.join(out_dir, name)
        if isinstance(content, tuple):
            kind, blocks = content
            save_model(path, {"model": kind, "config": cfg}, blocks)
        else:
            with open(path, "w") as fh:
                fh.write(content)
    return os.path.join(out_dir, "report.json")


def build_parser():
    parser = _Parser(prog="mvkit", description="Multi-view learning toolkit.")
    parser.add_argument("--version", action="version", version=f"mvkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with configuration keys")
        p.add_argument("--seed", type=int, help="random seed (overrides config)")
        p.add_argument("--out", default=None, help="output directory (default: mvkit-<command>)")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="override one configuration key; VALUE is parsed as JSON")
        if name != "selftest":
            p.add_argument("--input", help="input path (synthetic data when omitted)")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args.command, args.config, args.param, args.seed,
                             getattr(args, "input", None))
        if cfg.get("input") is not None and not os.path.exists(cfg["input"]):
            raise InvalidArgument(f"input not found: {cfg['input']}")
        results, files = COMMANDS[args.command](cfg)
        path = write_outputs(args.out or f"mvkit-{args.command}", args.command, cfg,
                             results, files)
        if args.command == "selftest":
            if results["failed"]:
                print(f"selftest: {len(results['failed'])} criteria failed", file=sys.stderr)
                return 1
        print(f"wrote {path}")
        return 0
    except ConvergenceFailure as exc:
        extra = f" (residual {exc.residual:.3g})" if exc.residual is not None else ""
        print(f"error: {exc}{extra}", file=sys.stderr)
        return 2
    except DegenerateInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvalidArgument, ParseError, SingularMatrix) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
