"""CART regression trees and a bagged random forest."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTarget, DimensionMismatch, SizeMismatch

# split candidates whose SSE is within this fraction of the parent SSE of the
# best one count as ties (broken by feature index, then threshold)
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class RegressionTree:
    """Flat array form of a binary tree; ``feature == -1`` marks a leaf.

    Samples with ``x[feature] <= threshold`` go left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        node = np.zeros(len(X), dtype=np.intp)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return self.value[node]
            r, n = rows[inner], node[inner]
            go_left = X[r, f[inner]] <= self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])


def best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray, min_leaf: int = 1):
    """Best (feature, threshold) by total child SSE, or None if no split exists.

    Thresholds are midpoints between consecutive distinct sorted values.
    """
    n = len(y)
    if n < 2 * min_leaf:
        return None
    yc = y - y.mean()
    parent = float(yc @ yc)
    xs = X[:, features]
    order = np.argsort(xs, axis=0, kind="stable")
    xs = np.take_along_axis(xs, order, axis=0)
    ys = yc[order]
    cs = np.cumsum(ys, axis=0)[:-1]
    cq = np.cumsum(ys * ys, axis=0)[:-1]
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = n - nl
    tot = ys.sum(axis=0)
    sse = (cq - cs ** 2 / nl) + ((parent - cq) - (tot - cs) ** 2 / nr)
    valid = (xs[1:] > xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return None
    sse = np.where(valid, sse, np.inf).T  # feature-major: ties -> lowest feature, lowest threshold
    best = sse.min()
    j, k = np.unravel_index(np.argmax(sse <= best + TIE_RTOL * parent), sse.shape)
    threshold = 0.5 * (xs[k, j] + xs[k + 1, j])
    return int(features[j]), float(threshold), float(best)


def fit_tree(X, y, max_features: int | None = None, min_leaf: int = 1,
             max_depth: int | None = None, rng: np.random.Generator | None = None) -> RegressionTree:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n_samples, n_features = X.shape
    m = n_features if max_features is None else min(max_features, n_features)
    rng = rng if rng is not None else np.random.default_rng(0)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    stack = [(new_node(np.arange(n_samples)), np.arange(n_samples), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yi = y[idx]
        if (max_depth is not None and depth >= max_depth) or np.ptp(yi) == 0:
            continue
        feats = np.arange(n_features) if m == n_features else np.sort(rng.choice(n_features, m, replace=False))
        split = best_split(X[idx], yi, feats, min_leaf)
        if split is None:
            continue
        f, thr, _ = split
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return RegressionTree(np.array(feature, dtype=np.intp), np.array(threshold),
                          np.array(left, dtype=np.intp), np.array(right, dtype=np.intp),
                          np.array(value), n_features)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_features: int | None = None  # None -> ceil(n_features / 3)
    min_leaf: int = 1
    bootstrap: bool = True
    max_depth: int | None = None


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    params: ForestParams
    seed: int
    n_features: int
    target: str = ""

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)


def tree_streams(seed: int, n_trees: int) -> list[np.random.Generator]:
    """One independent generator per tree, derived only from ``seed``."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_trees)]


def train_forest(X, y, params: ForestParams = ForestParams(), seed: int = 0,
                 target: str = "") -> ForestModel:
    """Bagged CART forest; each tree draws ``max_features`` candidates per split."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise SizeMismatch("X must be 2-D with one row per target")
    if len(y) < 1:
        raise SizeMismatch("need at least one training row")
    if np.ptp(y) == 0:
        warnings.warn(DegenerateTarget("all training targets are identical; constant predictor"))
    n, p = X.shape
    m = params.max_features or math.ceil(p / 3)
    trees = []
    for rng in tree_streams(seed, params.n_trees):
        idx = rng.integers(0, n, n) if params.bootstrap else np.arange(n)
        trees.append(fit_tree(X[idx], y[idx], m, params.min_leaf, params.max_depth, rng))
    return ForestModel(tuple(trees), params, seed, p, target)
