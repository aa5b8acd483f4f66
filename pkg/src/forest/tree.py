# src/forest/tree.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from src.errors import DataError, DimensionError

LEAF = -1
_MIN_GAIN = 1e-12


class Split(NamedTuple):
    feature: int
    threshold: float
    gain: float


def gini(class_counts: Sequence[float]) -> float:
    """1 - sum p_i^2 over the class proportions of a node."""
    counts = np.asarray(class_counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise DataError("gini impurity of an empty node is undefined")
    p = counts / total
    return float(1.0 - np.dot(p, p))


def _feature_best(col: np.ndarray, y: np.ndarray, parent: float, min_leaf: int):
    n = len(col)
    order = np.argsort(col, kind="stable")
    xs, ys = col[order], y[order]
    n_left = np.arange(1, n)
    ones_left = np.cumsum(ys)[:-1]
    ones_total = ones_left[-1] + ys[-1]
    ok = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
    if not ok.any():
        return None
    nl = n_left[ok].astype(float)
    nr = n - nl
    l1 = ones_left[ok].astype(float)
    r1 = ones_total - l1
    gini_l = 1.0 - ((l1 / nl) ** 2 + ((nl - l1) / nl) ** 2)
    gini_r = 1.0 - ((r1 / nr) ** 2 + ((nr - r1) / nr) ** 2)
    gains = parent - (nl * gini_l + nr * gini_r) / n
    best = int(np.argmax(gains))   # first max = lowest threshold
    pos = np.flatnonzero(ok)[best]
    lo, hi = xs[pos], xs[pos + 1]
    threshold = 0.5 * (lo + hi)
    if threshold >= hi:
        threshold = lo
    return float(threshold), float(gains[best])


def best_split(X: np.ndarray, y: np.ndarray, feature_subset: Sequence[int],
               min_samples_leaf: int = 1) -> Optional[Split]:
    """
    Best Gini split over the given features, thresholds at midpoints of
    consecutive distinct values. Ties go to the lower feature index, then the
    lower threshold. None when no split improves impurity.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(y) < 2:
        return None
    parent = gini(np.bincount(y, minlength=2))
    if parent == 0.0:
        return None
    best: Optional[Split] = None
    for f in sorted(int(i) for i in feature_subset):
        found = _feature_best(X[:, f], y, parent, min_samples_leaf)
        if found is None:
            continue
        threshold, gain = found
        if gain > _MIN_GAIN and (best is None or gain > best.gain):
            best = Split(f, threshold, gain)
    return best


@dataclass(frozen=True)
class DecisionTree:
    """Flat node arrays, root at 0; leaves have feature == LEAF."""
    feature: np.ndarray         # int64
    threshold: np.ndarray       # float64
    left: np.ndarray            # int64
    right: np.ndarray           # int64
    counts: np.ndarray          # (n_nodes, 2) int64

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] != LEAF
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Majority class of the reached leaf; a tied leaf says 0."""
        c = self.counts[self.apply(X)]
        return (c[:, 1] > c[:, 0]).astype(np.int64)

    def max_feature_index(self) -> int:
        internal = self.feature[self.feature != LEAF]
        return int(internal.max()) if internal.size else -1

    # nested form used by the model document
    def to_nested(self, node: int = 0) -> Dict[str, Any]:
        if self.feature[node] == LEAF:
            return {"counts": [int(v) for v in self.counts[node]]}
        return {
            "feature": int(self.feature[node]),
            "threshold": float(self.threshold[node]),
            "left": self.to_nested(int(self.left[node])),
            "right": self.to_nested(int(self.right[node])),
        }

    @classmethod
    def from_nested(cls, doc: Dict[str, Any]) -> "DecisionTree":
        b = _Builder()
        stack = [(doc, b.new())]
        while stack:
            node_doc, i = stack.pop()
            if "counts" in node_doc:
                b.leaf(i, node_doc["counts"])
                continue
            l, r = b.new(), b.new()
            b.split(i, int(node_doc["feature"]), float(node_doc["threshold"]), l, r)
            stack.append((node_doc["right"], r))
            stack.append((node_doc["left"], l))
        return b.build()


class _Builder:
    def __init__(self):
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.counts: List[List[int]] = []

    def new(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.counts.append([0, 0])
        return len(self.feature) - 1

    def leaf(self, i: int, counts) -> None:
        self.counts[i] = [int(counts[0]), int(counts[1])]

    def split(self, i: int, feature: int, threshold: float, left: int, right: int) -> None:
        self.feature[i], self.threshold[i] = feature, threshold
        self.left[i], self.right[i] = left, right

    def build(self) -> DecisionTree:
        return DecisionTree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=float),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            counts=np.asarray(self.counts, dtype=np.int64).reshape(-1, 2),
        )


def train_tree(X: np.ndarray, y: np.ndarray, params, tree_rng: np.random.Generator) -> DecisionTree:
    """
    Grow one CART tree. At each node `params.mtry` distinct features are drawn
    from `tree_rng`; if none of them yields a split the remaining features are
    searched before the node becomes a leaf.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise DimensionError(f"X has shape {X.shape} for {len(y)} labels")
    if len(y) < 1:
        raise DataError("cannot grow a tree from zero rows")
    d = X.shape[1]
    mtry = params.resolve_mtry(d)
    min_leaf = params.min_samples_leaf

    b = _Builder()
    stack = [(b.new(), np.arange(len(y)), 0)]
    while stack:
        node, rows, depth = stack.pop()
        counts = np.bincount(y[rows], minlength=2)
        if (params.max_depth is not None and depth >= params.max_depth) \
                or len(rows) < 2 * min_leaf or counts.min() == 0:
            b.leaf(node, counts)
            continue
        perm = tree_rng.permutation(d)
        split = best_split(X[rows], y[rows], perm[:mtry], min_leaf)
        if split is None and mtry < d:
            split = best_split(X[rows], y[rows], perm[mtry:], min_leaf)
        if split is None:
            b.leaf(node, counts)
            continue
        go_left = X[rows, split.feature] <= split.threshold
        l, r = b.new(), b.new()
        b.split(node, split.feature, split.threshold, l, r)
        stack.append((r, rows[~go_left], depth + 1))
        stack.append((l, rows[go_left], depth + 1))
    return b.build()
