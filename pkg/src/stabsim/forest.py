"""Random-forest classifier with Gini splits and mean-decrease-in-impurity importance.

Trees are grown on bootstrap samples; at every node ``mtry`` candidate
features are drawn uniformly without replacement and the split with the
largest Gini decrease wins (ties: lower feature index, then lower threshold).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import kernels
from .core import FeatureSubset, RngStream, parallel_map
from .data import Dataset, Split, leave_one_out_splits


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ForestConfig:
    n_tree: int = 100
    mtry: Optional[int] = None
    normalized_mtry: Optional[float] = None
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    bootstrap: bool = True
    subsample_fraction: float = 1.0

    def __post_init__(self):
        if self.n_tree < 1:
            raise ValueError("n_tree must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be >= 1")
        if self.normalized_mtry is not None and not 0 < self.normalized_mtry <= 1:
            raise ValueError("normalized_mtry must lie in (0, 1]")
        if not 0 < self.subsample_fraction <= 1:
            raise ValueError("subsample_fraction must lie in (0, 1]")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")

    def resolve_mtry(self, n_feature: int) -> int:
        if self.normalized_mtry is not None:
            m = int(round(self.normalized_mtry * n_feature))
        elif self.mtry is not None:
            m = self.mtry
        else:
            m = int(np.floor(np.sqrt(n_feature)))
        return min(max(m, 1), n_feature)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Tree:
    feature: np.ndarray  # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_node, n_class) class counts of the training rows reaching each node
    n_feature: int

    @property
    def node_count(self) -> int:
        return self.feature.shape[0]

    def leaf_for(self, row: np.ndarray) -> int:
        node = 0
        feature, threshold, left, right = self.feature, self.threshold, self.left, self.right
        while feature[node] >= 0:
            node = left[node] if row[feature[node]] <= threshold[node] else right[node]
        return node

    def predict_one(self, row: np.ndarray) -> int:
        return int(np.argmax(self.counts[self.leaf_for(row)]))

    def __eq__(self, other):
        return isinstance(other, Tree) and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("feature", "threshold", "left", "right", "counts")
        )


@dataclass(frozen=True)
class Forest:
    trees: tuple
    n_feature: int
    n_class: int
    config: ForestConfig


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    q = counts / n
    return float(1.0 - np.dot(q, q))


def _grow_tree(dataset: Dataset, rows: np.ndarray, config: ForestConfig, mtry: int, rng: RngStream) -> Tree:
    xt, y, k = dataset.features_t, dataset.labels, dataset.n_class
    n_feature = dataset.n_feature
    choice = rng.generator.choice
    feature, threshold, left, right, counts = [], [], [], [], []
    # stack of (node id, rows, depth); node ids assigned in creation order
    stack = [(0, rows, 0)]
    feature.append(-1), threshold.append(0.0), left.append(-1), right.append(-1), counts.append(None)
    while stack:
        node, idx, depth = stack.pop()
        c = np.bincount(y[idx], minlength=k)
        counts[node] = c
        n = idx.shape[0]
        if (
            n < config.min_samples_split
            or np.count_nonzero(c) <= 1
            or (config.max_depth is not None and depth >= config.max_depth)
        ):
            continue
        cand = np.sort(choice(n_feature, size=mtry, replace=False)).astype(np.int64)
        f, t, _ = kernels.best_split(xt, y, idx, cand, k)
        if f < 0:
            continue
        go_left = xt[f, idx] <= t
        li, ri = len(feature), len(feature) + 1
        for _ in range(2):
            feature.append(-1), threshold.append(0.0), left.append(-1), right.append(-1), counts.append(None)
        feature[node], threshold[node], left[node], right[node] = f, t, li, ri
        # right pushed first so the left subtree is expanded first
        stack.append((ri, idx[~go_left], depth + 1))
        stack.append((li, idx[go_left], depth + 1))
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.vstack(counts).astype(np.int64),
        n_feature,
    )


def fit_forest(dataset: Dataset, rows, config: ForestConfig, rng: RngStream, workers: int = 1) -> Forest:
    """Fit ``config.n_tree`` trees; tree ``t`` draws only from ``rng.child(t)``."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape[0] < config.min_samples_split:
        raise FitError(f"need at least {config.min_samples_split} rows, got {rows.shape[0]}")
    if np.unique(dataset.labels[rows]).shape[0] < 2:
        raise FitError("training rows contain a single class")
    mtry = config.resolve_mtry(dataset.n_feature)

    def one(t: int) -> Tree:
        sub = rng.child(t)
        idx = rows
        if config.bootstrap:
            idx = rows[sub.integers(0, rows.shape[0], size=rows.shape[0])]
        return _grow_tree(dataset, idx, config, mtry, sub)

    trees = parallel_map(one, list(range(config.n_tree)), workers)
    return Forest(tuple(trees), dataset.n_feature, dataset.n_class, config)


def tree_importance(tree: Tree) -> np.ndarray:
    """Unnormalized impurity decrease per feature for one tree."""
    imp = np.zeros(tree.n_feature)
    for node in np.flatnonzero(tree.feature >= 0):
        c = tree.counts[node]
        cl, cr = tree.counts[tree.left[node]], tree.counts[tree.right[node]]
        dec = c.sum() * _gini(c) - cl.sum() * _gini(cl) - cr.sum() * _gini(cr)
        imp[tree.feature[node]] += dec
    return imp


def gini_importance(forest: Forest, n_feature: Optional[int] = None) -> np.ndarray:
    """Mean decrease in impurity, each tree normalized to sum 1 before averaging.

    Trees without splits are left out of the average; the result sums to 1
    when at least one split exists and is all zeros otherwise.
    """
    n_feature = forest.n_feature if n_feature is None else n_feature
    per_tree = []
    for tree in forest.trees:
        if tree.node_count <= 1:
            continue
        imp = tree_importance(tree)
        s = imp.sum()
        if s > 0:
            imp = imp / s
        per_tree.append(imp)
    if not per_tree:
        return np.zeros(n_feature)
    out = np.mean(per_tree, axis=0)
    s = out.sum()
    return out / s if s > 0 else out


def predict(forest: Forest, row) -> int:
    """Majority vote of per-tree leaf argmaxes; ties go to the lower class."""
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (forest.n_feature,):
        raise ValueError(f"row has {row.shape[-1] if row.ndim else 0} values, forest expects {forest.n_feature}")
    votes = np.zeros(forest.n_class, dtype=np.int64)
    for tree in forest.trees:
        votes[tree.predict_one(row)] += 1
    return int(np.argmax(votes))


Selection = Union[FeatureSubset, Callable[[Split, RngStream], FeatureSubset]]


def loo_accuracy(
    dataset: Dataset,
    selected: Selection,
    config: ForestConfig,
    rng: RngStream,
    splits: Optional[list] = None,
) -> float:
    """Leave-one-out accuracy of a forest trained on each split's train2 rows,
    restricted to the selected columns.

    ``selected`` is either a fixed subset or a callable ``(split, rng)``
    returning the subset chosen from that split's train1 rows.
    """
    if dataset.n_sample < 3:
        raise ValueError("leave-one-out accuracy needs n_sample >= 3")
    if splits is None:
        splits = leave_one_out_splits(dataset, rng.child(0))
    correct = 0
    for i, split in enumerate(splits):
        stream = rng.child(1).child(i)
        subset = selected(split, stream.child(0)) if callable(selected) else selected
        cols = subset.sorted()
        sub = dataset.select_columns(cols)
        forest = fit_forest(sub, split.train2, config, stream.child(1))
        test = int(split.test[0])
        correct += predict(forest, sub.features[test]) == dataset.labels[test]
    return correct / len(splits)
