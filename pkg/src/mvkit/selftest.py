"""Property and oracle checks with stated tolerances and runtime budgets.

Each ``check_*`` function returns a :class:`CriterionResult`; ``passed``
requires both the numerical condition and the runtime budget.
"""
import itertools
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np


@dataclass
class CriterionResult:
    number: int
    name: str
    ok: bool
    detail: str
    seconds: float
    budget: float

    @property
    def passed(self):
        return self.ok and self.seconds < self.budget

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.number:2d} {self.name}: {self.detail} "
                f"({self.seconds:.1f}s of {self.budget:g}s)")

    def as_dict(self):
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "seconds": round(self.seconds, 3), "budget": self.budget}


def _timed(number, name, budget, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - t0, budget)


# ---------------------------------------------------------------- 1 tensor algebra

def _tensor_algebra():
    from .tensor import (inner_product, khatri_rao, mode_k_matricize, mode_k_refold,
                         outer_product)

    worst_inner = worst_gram = 0.0
    roundtrip = True
    for seed in range(100):
        rng = np.random.default_rng(seed)
        dims = rng.integers(1, 8, size=3)
        a, b, c = (rng.standard_normal(d) for d in dims)
        x, y, z = (rng.standard_normal(d) for d in dims)
        T1, T2 = outer_product(a, b, c), outer_product(x, y, z)
        lhs = inner_product(T1, T2)
        rhs = (a @ x) * (b @ y) * (c @ z)
        # error relative to the Cauchy-Schwarz scale, which is the conditioning of the sum
        scale = np.linalg.norm(T1) * np.linalg.norm(T2)
        worst_inner = max(worst_inner, abs(lhs - rhs) / scale)

        I, J, K = rng.integers(1, 9, size=3)
        A, B = rng.standard_normal((I, K)), rng.standard_normal((J, K))
        KR = khatri_rao(A, B)
        G1, G2 = KR.T @ KR, (A.T @ A) * (B.T @ B)
        worst_gram = max(worst_gram, np.linalg.norm(G1 - G2) / np.linalg.norm(G2))

        X = rng.standard_normal(tuple(rng.integers(1, 7, size=3)))
        for k in (1, 2, 3):
            back = mode_k_refold(mode_k_matricize(X, k), k, X.shape)
            roundtrip &= back.shape == X.shape and np.array_equal(back, X)
    ok = worst_inner <= 1e-12 and worst_gram <= 1e-12 and roundtrip
    return ok, (f"inner rel err {worst_inner:.2e}, Khatri-Rao Gram rel err {worst_gram:.2e}, "
                f"round-trip bit-exact={roundtrip}")


# ---------------------------------------------------------------- 2 ranking equivalence

def _ranking_equivalence():
    from .dataio import synth_multiview
    from .mvfs import rank_linear, tmvfs_select

    mismatches = 0
    cases = 0
    for m in (2, 3):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            dims = tuple(int(d) for d in rng.integers(2, 7, size=m))
            random_weights = [rng.standard_normal(d) for d in dims]
            ds = synth_multiview(seed, n=30, dims=dims, threshold=0.5 ** m)
            if np.unique(ds.y).size < 2:
                ds.y[0] = -ds.y[0]
            trained_weights = tmvfs_select(ds, list(dims)).weights
            for weights in (random_weights, trained_weights):
                W = weights[0]
                for w in weights[1:]:
                    W = np.multiply.outer(W, w)
                for v in range(m):
                    axes = tuple(j for j in range(m) if j != v)
                    dense = np.sum(W ** 2, axis=axes)
                    fact = rank_linear(weights[v])
                    cases += 1
                    mismatches += not np.array_equal(np.argsort(dense, kind="stable"),
                                                     np.argsort(fact, kind="stable"))
    return mismatches == 0, f"{cases - mismatches}/{cases} per-view orders identical"


# ---------------------------------------------------------------- 3 planted features

def _planted_features():
    from .dataio import synth_multiview
    from .mvfs import tmvfs_select

    hits = 0
    for seed in range(100):
        ds = synth_multiview(seed, n=50, dims=(10, 10))
        st = tmvfs_select(ds, [1, 1], C=1.0)
        hits += all(0 in s for s in st.selected)
    return hits >= 95, f"informative feature kept in both views in {hits}/100 runs"


# ---------------------------------------------------------------- 4 bound soundness

def _bound_soundness():
    from .dataio import synth_graph_corpus
    from .subgraph import contains, gmsv_mine

    pairs = violations = 0
    for seed in range(50):
        corpus, sides, _ = synth_graph_corpus(seed)
        res = gmsv_mine(corpus, sides, k=3, min_sup=2, max_edges=4, prune=False, record=True)
        recs = res.trace
        graphs = [r.code.to_graph() for r in recs]
        for a, ra in enumerate(recs):
            for b, rb in enumerate(recs):
                if len(rb.code) <= len(ra.code) or np.any(rb.f > ra.f):
                    continue
                if not contains(graphs[b], graphs[a]):
                    continue
                pairs += 1
                violations += rb.q < ra.q_hat
    return violations == 0 and pairs > 0, f"{pairs} sub/supergraph pairs, {violations} violations"


# ---------------------------------------------------------------- 5 pruning equivalence

def _pruning_equivalence():
    from .dataio import synth_graph_corpus
    from .subgraph import gmsv_mine

    same = fewer = 0
    for seed in range(50):
        corpus, sides, _ = synth_graph_corpus(seed)
        a = gmsv_mine(corpus, sides, k=3, min_sup=2, max_edges=4, prune=True)
        b = gmsv_mine(corpus, sides, k=3, min_sup=2, max_edges=4, prune=False)
        same += ([(p.code, p.q) for p in a.patterns] == [(p.code, p.q) for p in b.patterns])
        fewer += a.explored < b.explored
    ok = same == 50 and fewer >= 40
    return ok, f"identical top-k on {same}/50 corpora, fewer nodes explored on {fewer}/50"


# ---------------------------------------------------------------- 6 gSpan completeness

def _canonical(labels, edges):
    """Permutation-minimal form of a small labeled graph."""
    best = None
    for perm in itertools.permutations(range(len(labels))):
        lab = tuple(labels[perm.index(i)] for i in range(len(labels)))
        es = tuple(sorted((min(perm[a], perm[b]), max(perm[a], perm[b]), l)
                          for (a, b), l in edges.items()))
        if best is None or (lab, es) < best:
            best = (lab, es)
    return best


def _connected(edge_list):
    verts = {v for e in edge_list for v in e}
    adj = {v: set() for v in verts}
    for a, b in edge_list:
        adj[a].add(b)
        adj[b].add(a)
    start = next(iter(verts))
    seen, stack = {start}, [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(verts)


def brute_force_patterns(graphs, min_sup, max_edges):
    """Frequent connected subgraphs by edge-subset enumeration; maps canonical form to support set."""
    support = {}
    for gid, g in enumerate(graphs):
        edge_keys = list(g.edges)
        for r in range(1, max_edges + 1):
            for sub in itertools.combinations(edge_keys, r):
                if not _connected(sub):
                    continue
                verts = sorted({v for e in sub for v in e})
                idx = {v: i for i, v in enumerate(verts)}
                key = _canonical([g.node_labels[v] for v in verts],
                                 {(idx[a], idx[b]): g.edges[(a, b)] for a, b in sub})
                support.setdefault(key, set()).add(gid)
    return {k: frozenset(s) for k, s in support.items() if len(s) >= min_sup}


def _random_graph(rng, max_nodes=6, n_labels=2, n_edge_labels=2, p=0.45):
    from .subgraph import LabeledGraph

    n = int(rng.integers(2, max_nodes + 1))
    labels = [int(l) for l in rng.integers(0, n_labels, n)]
    edges = {(i, j): int(rng.integers(0, n_edge_labels))
             for i in range(n) for j in range(i + 1, n) if rng.random() < p}
    return LabeledGraph(labels, edges)


def _gspan_completeness():
    from .subgraph import gspan_enumerate

    exact = 0
    total = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        graphs = [_random_graph(rng) for _ in range(6)]
        max_edges = 1 + seed % 4
        seen = {}
        dup = False

        def visit(code, f):
            nonlocal dup
            g = code.to_graph()
            key = _canonical(g.node_labels, g.edges)
            dup |= key in seen
            seen[key] = frozenset(int(i) for i in np.flatnonzero(f))

        gspan_enumerate(graphs, 2, max_edges, visit)
        oracle = brute_force_patterns(graphs, 2, max_edges)
        exact += (not dup) and seen == oracle
        total += len(oracle)
    return exact == 20, f"{exact}/20 corpora match the oracle exactly ({total} patterns)"


# ---------------------------------------------------------------- 7 planted tensor

def _planted_tensor():
    from .bne import BNEConfig, tbne_fit, update_B
    from .dataio import synth_planted_tensor

    hand = update_B(np.full((1, 1, 1), 6.0), np.array([[2.0]]), np.array([[3.0]]),
                    np.zeros((1, 1)), 2.0)[0, 0]
    hand_err = abs(hand - 78.0 / 74.0)
    ok_runs = 0
    for seed in range(20):
        pt = synth_planted_tensor(1000 + seed, m=8, n=12, k=3, noise=0.0)
        cfg = BNEConfig(k=3, alpha=0.0, beta=0.0, tol=1e-12, max_iter=500, seed=seed)
        model = tbne_fit(pt.X, None, None, cfg)
        err = np.linalg.norm(pt.X - model.reconstruct()) / np.linalg.norm(pt.X)
        orth = np.linalg.norm(model.S.T @ model.S - np.eye(3))
        ok_runs += err <= 1e-3 and orth <= 1e-6
    ok = ok_runs >= 18 and hand_err <= 1e-12
    return ok, f"recovered {ok_runs}/20 seeds, scalar case error {hand_err:.1e}"


# ---------------------------------------------------------------- 8 gradients and stationarity

def _central_diff(f, Z, h):
    g = np.zeros_like(Z)
    for idx in np.ndindex(Z.shape):
        old = Z[idx]
        Z[idx] = old + h
        fp = f(Z)
        Z[idx] = old - h
        fm = f(Z)
        Z[idx] = old
        g[idx] = (fp - fm) / (2 * h)
    return g


def _bne_gradients():
    from .bne import (subject_gradient, subject_objective, update_B, update_P, update_W)
    from .numkit import laplacian
    from .tensor import khatri_rao, mode_k_matricize

    worst_s = worst_b = worst_p = worst_w = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        m, n, k, c = 5, 7, 3, 2
        A = rng.standard_normal((m, m, n))
        X = 0.5 * (A + A.transpose(1, 0, 2))
        B, P, U = (rng.standard_normal((m, k)) for _ in range(3))
        S = np.linalg.qr(rng.standard_normal((n, k)))[0]
        Zs = rng.standard_normal((n, 3))
        LZ = laplacian(Zs @ Zs.T)
        D = np.sort(rng.choice(n, size=4, replace=False))
        W, Y = rng.standard_normal((k, c)), rng.standard_normal((4, c))
        alpha, beta, mu, gamma = 0.3, 0.7, float(rng.uniform(0.5, 3.0)), 0.25
        G = khatri_rao(P, B)
        X3 = mode_k_matricize(X, 3)

        g = subject_gradient(S, X, G, LZ, D, W, Y, alpha, beta)
        fd = _central_diff(lambda T: 0.5 * subject_objective(T, X3, G, LZ, D, W, Y, alpha, beta),
                           S.copy(), 1e-6)
        worst_s = max(worst_s, np.linalg.norm(g - fd) / np.linalg.norm(fd))

        X1, X2 = mode_k_matricize(X, 1), mode_k_matricize(X, 2)
        E, F = khatri_rao(S, P), khatri_rao(S, B)

        def lag_B(Bv):
            return (np.sum((X1 - Bv @ E.T) ** 2) + np.sum(U * (P - Bv))
                    + 0.5 * mu * np.sum((P - Bv) ** 2))

        Bn = update_B(X, S, P, U, mu)
        scale = np.linalg.norm(2 * X1 @ E) + mu * np.linalg.norm(P) + np.linalg.norm(U)
        worst_b = max(worst_b, np.linalg.norm(_central_diff(lag_B, Bn.copy(), 1e-6)) / scale)

        def lag_P(Pv):
            return (np.sum((X2 - Pv @ F.T) ** 2) + np.sum(U * (Pv - B))
                    + 0.5 * mu * np.sum((Pv - B) ** 2))

        Pn = update_P(X, S, B, U, mu)
        scale = np.linalg.norm(2 * X2 @ F) + mu * np.linalg.norm(B) + np.linalg.norm(U)
        worst_p = max(worst_p, np.linalg.norm(_central_diff(lag_P, Pn.copy(), 1e-6)) / scale)

        DS = S[D]

        def obj_W(Wv):
            return np.sum((DS @ Wv - Y) ** 2) + gamma * np.sum(Wv ** 2)

        Wn = update_W(S, D, Y, gamma)
        scale = 2 * np.linalg.norm(DS.T @ Y)
        worst_w = max(worst_w, np.linalg.norm(_central_diff(obj_W, Wn.copy(), 1e-6)) / scale)
    ok = worst_s <= 1e-6 and max(worst_b, worst_p, worst_w) <= 1e-6
    return ok, (f"S-gradient rel err {worst_s:.1e}; scaled stationarity B {worst_b:.1e}, "
                f"P {worst_p:.1e}, W {worst_w:.1e}")


# ---------------------------------------------------------------- 9 fusion oracles

def _fusion_oracles():
    from .deepmood.heads import fm_head, init_head, mvm_head, param_count

    worst_fm = worst_mvm = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        m = 2 + seed % 2
        d_view = int(rng.integers(1, 4))
        d_k, c = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        hs = [rng.standard_normal(d_view) for _ in range(m)]
        h = np.concatenate(hs)
        fm = init_head(rng, "fm", [d_view] * m, d_k, c)
        mvm = init_head(rng, "mvm", [d_view] * m, d_k, c)
        for a in range(c):
            U, w = fm["Ufm"][a], fm["wfm"][a]
            brute = sum((U[:, i] @ U[:, j]) * h[i] * h[j]
                        for i in range(h.size) for j in range(h.size))
            brute += w[:-1] @ h + w[-1]
            val = fm_head(h, fm, a)
            worst_fm = max(worst_fm, abs(val - brute) / max(1.0, abs(brute)))

            hbar = [np.append(x, 1.0) for x in hs]
            brute = 0.0
            for idx in itertools.product(*(range(d_view + 1) for _ in range(m))):
                coef = np.sum(np.prod([mvm[f"Umvm{p}"][a][:, i] for p, i in enumerate(idx)],
                                      axis=0))
                brute += coef * np.prod([hbar[p][i] for p, i in enumerate(idx)])
            val = mvm_head(hs, mvm, a)
            worst_mvm = max(worst_mvm, abs(val - brute) / max(1.0, abs(brute)))
    counts_ok = True
    grid = 0
    rng = np.random.default_rng(0)
    for c in (1, 2, 3):
        for d_k in (1, 4, 8, 16):
            for d_h in (1, 4, 8):
                for dirs in (1, 2):
                    for m in (2, 3, 4):
                        dims = [d_h * dirs] * m
                        d_c = sum(dims)
                        for variant in ("fc", "fm", "mvm"):
                            head = init_head(rng, variant, dims, d_k, c, zero=True)
                            actual = sum(v.size for v in head.values())
                            counts_ok &= actual == param_count(variant, c, d_k, d_c, m)
                            grid += 1
                        fc_hidden = init_head(rng, "fc", dims, d_k, c, zero=True)["W1"].shape[0]
                        counts_ok &= fc_hidden == c * d_k
    ok = worst_fm <= 1e-10 and worst_mvm <= 1e-10 and counts_ok
    return ok, (f"FM err {worst_fm:.1e}, MVM err {worst_mvm:.1e}, "
                f"parameter counts exact on {grid} configurations={counts_ok}")


# ---------------------------------------------------------------- 10 model gradients and overfit

def _model_gradients():
    from .dataio import synth_sessions
    from .deepmood import SessionInstance, TrainConfig, init_model, loss_and_grads, train

    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        head = ("fc", "fm", "mvm")[seed % 3]
        task = "regression" if seed % 4 == 3 else "classification"
        data = [SessionInstance([rng.standard_normal((int(rng.integers(1, 7)), 2)),
                                 rng.standard_normal((int(rng.integers(1, 7)), 2))],
                                float(i % 2) if task == "classification" else rng.standard_normal())
                for i in range(4)]
        cfg = TrainConfig(head=head, d_h=2, d_k=2, task=task, seed=seed, dropout=0.0)
        model = init_model([2, 2], 2 if task == "classification" else 1, cfg, rng)
        _, grads = loss_and_grads(model, data)
        num = {}
        for name, arr in model.params.items():
            num[name] = _central_diff(lambda _: loss_and_grads(model, data)[0], arr, 1e-5)
        a = np.concatenate([grads[k].ravel() for k in model.params])
        b = np.concatenate([num[k].ravel() for k in model.params])
        worst = max(worst, np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b)))
    per_head = {}
    for head in ("fc", "fm", "mvm"):
        hits = 0
        for seed in range(20):
            data = synth_sessions(seed, n=16)
            cfg = TrainConfig(head=head, epochs=200, batch=256, lr=1e-3, dropout=0.1,
                              seed=seed, stop_at_train_accuracy=1.0)
            model = train(data, cfg)
            hits += model.history[-1]["train_accuracy"] == 1.0
        per_head[head] = hits
    ok = worst <= 1e-4 and all(h >= 18 for h in per_head.values())
    overfit = ", ".join(f"{k} {v}/20" for k, v in per_head.items())
    return ok, f"gradient rel err {worst:.1e}; training accuracy 1.0 within 200 epochs: {overfit}"


# ---------------------------------------------------------------- 11 determinism

def _strip_timestamp(text):
    return "\n".join(line for line in text.splitlines() if not line.lstrip().startswith('"timestamp"'))


def _run_outputs(command, out_dir):
    from .cli import main

    code = main([command, "--seed", "7", "--out", out_dir])
    files = {}
    for name in sorted(os.listdir(out_dir)):
        with open(os.path.join(out_dir, name), "rb") as fh:
            data = fh.read()
        if name == "report.json":
            data = _strip_timestamp(data.decode()).encode()
        files[name] = data
    return code, files


def _determinism():
    import contextlib
    import io

    identical = []
    with tempfile.TemporaryDirectory() as tmp, contextlib.redirect_stdout(io.StringIO()):
        for command in ("mvfs", "mine", "bne", "mood"):
            c1, f1 = _run_outputs(command, os.path.join(tmp, command + "1"))
            c2, f2 = _run_outputs(command, os.path.join(tmp, command + "2"))
            identical.append((command, c1 == 0 and c2 == 0 and f1 == f2))
    ok = all(flag for _, flag in identical)
    return ok, ", ".join(f"{c} {'identical' if f else 'DIFFERENT'}" for c, f in identical)


CRITERIA = [
    (1, "tensor algebra identities", 1.0, _tensor_algebra),
    (2, "factorized vs dense ranking", 5.0, _ranking_equivalence),
    (3, "tMVFS planted-feature recovery", 60.0, _planted_features),
    (4, "gSide bound soundness", 30.0, _bound_soundness),
    (5, "pruned vs exhaustive top-k", 120.0, _pruning_equivalence),
    (6, "gSpan completeness", 120.0, _gspan_completeness),
    (7, "tBNE planted recovery", 60.0, _planted_tensor),
    (8, "tBNE gradients and stationarity", 30.0, _bne_gradients),
    (9, "fusion head oracles and parameter counts", 5.0, _fusion_oracles),
    (10, "DeepMood gradients and overfit", 180.0, _model_gradients),
    (11, "CLI determinism", 60.0, _determinism),
]


def run_criterion(number):
    num, name, budget, fn = CRITERIA[number - 1]
    return _timed(num, name, budget, fn)


def run_all(verbose=False):
    results = []
    for num, _, _, _ in CRITERIA:
        res = run_criterion(num)
        if verbose:
            print(res.line(), flush=True)
        results.append(res)
    return results
