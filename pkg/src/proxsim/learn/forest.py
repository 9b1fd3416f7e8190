"""Random Forest of histogram-binned Gini CART trees.

Features are quantised once to at most 255 bins per column; a split sends
``x <= edge`` left. Each tree sees a bootstrap sample (expressed as integer
row weights) and considers ``ceil(sqrt(d))`` random features per node,
continuing through the remaining features only when none of those yields a
valid split. Leaves store class frequencies and the forest averages them.
"""

from __future__ import annotations

import io
import json
import math
import os
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numba as nb
import numpy as np

MODEL_SCHEMA = "proxsim-forest-v1"
MAX_BINS = 255
_GAIN_EPS = 1e-12


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 200
    max_depth: int = 8
    min_samples_leaf: int = 5
    max_features: str | int = "sqrt"
    max_bins: int = MAX_BINS
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.min_samples_leaf < 1:
            raise ModelError("n_trees, max_depth and min_samples_leaf must be >= 1")
        if not 2 <= self.max_bins <= MAX_BINS:
            raise ModelError(f"max_bins must lie in [2, {MAX_BINS}]")
        if isinstance(self.max_features, str) and self.max_features not in ("sqrt", "all"):
            raise ModelError("max_features must be 'sqrt', 'all' or a positive integer")

    def features_per_node(self, d: int) -> int:
        if self.max_features == "sqrt":
            return max(1, math.ceil(math.sqrt(d)))
        if self.max_features == "all":
            return d
        return max(1, min(int(self.max_features), d))


# --- binning ---------------------------------------------------------------

def bin_edges(X: np.ndarray, max_bins: int = MAX_BINS, sample: int = 200_000, seed: int = 0) -> list[np.ndarray]:
    """Per-column split edges: the distinct values when few, else quantiles."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] > sample:
        rows = np.random.default_rng(seed).choice(X.shape[0], sample, replace=False)
        ref = X[np.sort(rows)]
    else:
        ref = X
    edges = []
    for j in range(X.shape[1]):
        u = np.unique(ref[:, j])
        if u.size <= max_bins:
            e = u[:-1]
        else:
            e = np.unique(np.quantile(ref[:, j], np.linspace(0, 1, max_bins + 1)[1:-1]))
        edges.append(np.ascontiguousarray(e, dtype=float))
    return edges


def apply_bins(X: np.ndarray, edges: list[np.ndarray]) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(edges):
        raise ModelError(f"expected {len(edges)} feature columns, got shape {X.shape}")
    out = np.empty(X.shape, dtype=np.uint8)
    for j, e in enumerate(edges):
        out[:, j] = np.searchsorted(e, X[:, j], side="left")
    return out


# --- numba kernels ---------------------------------------------------------

@nb.njit(cache=True)
def _splitmix(state):
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def _randint(state, n):
    return np.int64(_splitmix(state) % np.uint64(n))


@nb.njit(cache=True, nogil=True)
def _grow_tree(Xb, y, w, n_classes, max_depth, min_leaf, k_features, seed):
    n, d = Xb.shape
    idx = np.flatnonzero(w > 0)
    m = idx.size
    max_leaves = min(int(w.sum()) // min_leaf, m) + 1
    if max_depth < 40:
        max_leaves = min(max_leaves, 2 ** max_depth)
    cap = 2 * max_leaves + 1
    feat = np.full(cap, -1, np.int32)
    thr = np.zeros(cap, np.int32)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    value = np.zeros((cap, n_classes), np.float64)

    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed)
    perm = np.arange(d)
    hist = np.zeros((256, n_classes), np.float64)

    # stack of (node, start, end, depth)
    stack = np.empty((max_depth + 2, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = m
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    counts = np.zeros(n_classes, np.float64)
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]

        counts[:] = 0.0
        for p in range(start, end):
            i = idx[p]
            counts[y[i]] += w[i]
        total = counts.sum()
        for c in range(n_classes):
            value[node, c] = counts[c] / total
        n_nonzero = 0
        for c in range(n_classes):
            if counts[c] > 0:
                n_nonzero += 1
        if depth >= max_depth or total < 2 * min_leaf or n_nonzero < 2:
            continue

        parent_sq = 0.0
        for c in range(n_classes):
            parent_sq += counts[c] * counts[c]
        parent_imp = 1.0 - parent_sq / (total * total)

        best_gain = _GAIN_EPS
        best_f = -1
        best_b = -1
        # partial Fisher-Yates: draw features one at a time
        for r in range(d):
            s = r + _randint(state, d - r)
            tmp = perm[r]
            perm[r] = perm[s]
            perm[s] = tmp
            if r >= k_features and best_f >= 0:
                break
            f = perm[r]
            lo = 255
            hi = 0
            for p in range(start, end):
                b = Xb[idx[p], f]
                if b < lo:
                    lo = b
                if b > hi:
                    hi = b
            if lo == hi:
                continue
            for b in range(lo, hi + 1):
                for c in range(n_classes):
                    hist[b, c] = 0.0
            for p in range(start, end):
                i = idx[p]
                hist[Xb[i, f], y[i]] += w[i]
            lc = np.zeros(n_classes, np.float64)
            lw = 0.0
            for b in range(lo, hi):
                for c in range(n_classes):
                    lc[c] += hist[b, c]
                    lw += hist[b, c]
                rw = total - lw
                if lw < min_leaf or rw < min_leaf:
                    continue
                lsq = 0.0
                rsq = 0.0
                for c in range(n_classes):
                    lsq += lc[c] * lc[c]
                    rc = counts[c] - lc[c]
                    rsq += rc * rc
                child = (lw - lsq / lw) + (rw - rsq / rw)
                gain = parent_imp - child / total
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_b = b
        if best_f < 0:
            continue

        # in-place partition
        i0 = start
        i1 = end - 1
        while i0 <= i1:
            if Xb[idx[i0], best_f] <= best_b:
                i0 += 1
            else:
                tmp = idx[i0]
                idx[i0] = idx[i1]
                idx[i1] = tmp
                i1 -= 1
        feat[node] = best_f
        thr[node] = best_b
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack[top, 0] = n_nodes + 1
        stack[top, 1] = i0
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        stack[top + 1, 0] = n_nodes
        stack[top + 1, 1] = start
        stack[top + 1, 2] = i0
        stack[top + 1, 3] = depth + 1
        top += 2
        n_nodes += 2
    return feat[:n_nodes].copy(), thr[:n_nodes].copy(), left[:n_nodes].copy(), right[:n_nodes].copy(), value[:n_nodes].copy()


@nb.njit(cache=True, nogil=True)
def _predict_into(Xb, feat, thr, left, right, value, offsets, tree_lo, tree_hi, out):
    n = Xb.shape[0]
    for t in range(tree_lo, tree_hi):
        base = offsets[t]
        for i in range(n):
            node = 0
            while left[base + node] >= 0:
                if Xb[i, feat[base + node]] <= thr[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            out[i, :] += value[base + node, :]


# --- model -----------------------------------------------------------------

def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("PROXSIM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ForestModel:
    params: ForestParams
    n_classes: int
    columns: list[str]
    edges: list[np.ndarray]
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    offsets: np.ndarray

    @property
    def n_trees(self) -> int:
        return self.offsets.shape[0] - 1

    def predict_proba(self, X) -> np.ndarray:
        Xb = apply_bins(X, self.edges)
        n = Xb.shape[0]
        out = np.zeros((n, self.n_classes))
        # rows are split across threads so each row sums its trees in one fixed order
        threads = max(1, min(_thread_count(), n))
        bounds = np.linspace(0, n, threads + 1).astype(int)

        def run(k):
            lo, hi = bounds[k], bounds[k + 1]
            _predict_into(Xb[lo:hi], self.feature, self.threshold, self.left, self.right, self.value,
                          self.offsets, 0, self.n_trees, out[lo:hi])

        if threads == 1:
            run(0)
        else:
            with ThreadPoolExecutor(threads) as pool:
                list(pool.map(run, range(threads)))
        return out / self.n_trees

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def save(self, path) -> Path:
        """Write an ``.npz`` archive; member timestamps are fixed so equal models give equal bytes."""
        path = Path(path)
        meta = {"schema": MODEL_SCHEMA, "params": asdict(self.params), "n_classes": self.n_classes,
                "columns": self.columns}
        arrays = {
            "meta": np.array(json.dumps(meta, sort_keys=True)),
            "edge_lens": np.array([e.size for e in self.edges], dtype=np.int64),
            "edges": np.concatenate(self.edges) if self.edges else np.zeros(0),
            "feature": self.feature, "threshold": self.threshold, "left": self.left,
            "right": self.right, "value": self.value, "offsets": self.offsets,
        }
        with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
            for name, arr in arrays.items():
                buf = io.BytesIO()
                np.lib.format.write_array(buf, np.asarray(arr), allow_pickle=False)
                info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                zf.writestr(info, buf.getvalue())
        return path

    @classmethod
    def load(cls, path) -> "ForestModel":
        with np.load(Path(path), allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            if meta.get("schema") != MODEL_SCHEMA:
                raise ModelError(f"unsupported model schema {meta.get('schema')!r}")
            split = np.cumsum(z["edge_lens"])[:-1]
            edges = [np.ascontiguousarray(e) for e in np.split(z["edges"], split)]
            return cls(ForestParams(**meta["params"]), meta["n_classes"], meta["columns"], edges,
                       z["feature"], z["threshold"], z["left"], z["right"], z["value"], z["offsets"])


def train_forest(X, y, params: ForestParams | None = None, columns: list[str] | None = None,
                 n_classes: int | None = None) -> ForestModel:
    params = params or ForestParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ModelError("X must be 2-D with one label per row")
    if X.shape[0] == 0:
        raise ModelError("no training rows")
    if not np.all(np.isfinite(X)):
        raise ModelError("training features contain non-finite values")
    n, d = X.shape
    n_classes = int(n_classes if n_classes is not None else y.max() + 1)
    if y.min() < 0 or y.max() >= n_classes:
        raise ModelError("labels must lie in [0, n_classes)")

    edges = bin_edges(X, params.max_bins, seed=params.seed)
    Xb = apply_bins(X, edges)
    k = params.features_per_node(d)

    seqs = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    jobs = []
    for s in seqs:
        g = np.random.default_rng(s)
        if params.bootstrap:
            w = np.bincount(g.integers(0, n, n), minlength=n).astype(np.float64)
        else:
            w = np.ones(n)
        jobs.append((w, int(g.integers(0, 2**63 - 1))))

    def grow(job):
        w, seed = job
        return _grow_tree(Xb, y, w, n_classes, params.max_depth, params.min_samples_leaf, k, seed)

    threads = _thread_count()
    if threads == 1:
        trees = [grow(j) for j in jobs]
    else:
        with ThreadPoolExecutor(threads) as pool:
            trees = list(pool.map(grow, jobs))

    sizes = np.array([t[0].size for t in trees], dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    cat = [np.concatenate([t[i] for t in trees]) for i in range(5)]
    return ForestModel(params, n_classes, list(columns) if columns is not None else [f"x{j}" for j in range(d)],
                       edges, cat[0], cat[1], cat[2], cat[3], cat[4], offsets)
