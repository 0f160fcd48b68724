"""Bagged decision-tree classifier over one-hot encoded categorical features.

Stands in for an off-the-shelf random forest with default hyper-parameters:
bootstrap samples of size n, Gini split selection over ceil(sqrt(f)) features
per node, unlimited depth, majority vote with ties broken toward label 0.

The hot loops live in a compiled extension (``ldpfair._forest_core``) with a
pure-Python fallback selected at import time; both produce bit-identical
models from the same seed.  Set ``LDPFAIR_FOREST_BACKEND=python`` to force
the fallback.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .data import ROLE_OUTCOME, Dataset
from .errors import ParameterError

from . import _forest_py

if os.environ.get("LDPFAIR_FOREST_BACKEND") == "python":
    _kernel = _forest_py
    BACKEND = "python"
else:
    try:
        from . import _forest_core as _kernel  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _kernel = _forest_py
        BACKEND = "python"

_UNLIMITED_DEPTH = 2**31 - 1


def backend_name() -> str:
    """Which kernel was selected at import: ``compiled`` or ``python``."""
    return BACKEND


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    features_per_split: int | str = "sqrt"
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ParameterError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_samples_split < 2:
            raise ParameterError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ParameterError(f"max_depth must be >= 1 or None, got {self.max_depth}")


@dataclass(frozen=True)
class Tree:
    """Node arrays: internal nodes carry a feature and children, leaves a label."""

    feature: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label: np.ndarray


@dataclass(frozen=True)
class TrainedModel:
    params: ForestParams
    features: tuple[tuple[str, int], ...]  # (attribute name, category index) per one-hot column
    feature_domains: dict[str, int]  # attribute -> domain size seen at training time
    outcome_name: str
    trees: tuple[Tree, ...]
    constant_label: int | None  # set when the training labels were single-class

    def to_json(self) -> str:
        """Debugging dump; not a stability-guaranteed format."""
        doc = {
            "params": {
                "n_trees": self.params.n_trees,
                "max_depth": self.params.max_depth,
                "min_samples_split": self.params.min_samples_split,
                "features_per_split": self.params.features_per_split,
                "bootstrap": self.params.bootstrap,
                "seed": self.params.seed,
            },
            "features": [list(f) for f in self.features],
            "outcome": self.outcome_name,
            "constant_label": self.constant_label,
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "label": t.label.tolist(),
                }
                for t in self.trees
            ],
        }
        return json.dumps(doc)


def gini(counts) -> float:
    """Gini impurity of a binary label distribution: 1 - sum((c_i/n)^2)."""
    c0, c1 = (int(c) for c in counts)
    if c0 < 0 or c1 < 0:
        raise ParameterError("counts must be non-negative")
    n = c0 + c1
    if n == 0:
        raise ParameterError("counts must not both be zero")
    return 1.0 - ((c0 / n) ** 2 + (c1 / n) ** 2)


def _one_hot(columns: dict[str, np.ndarray], features) -> np.ndarray:
    n = len(next(iter(columns.values()))) if columns else 0
    x = np.empty((n, len(features)), dtype=np.uint8)
    for j, (name, cat) in enumerate(features):
        x[:, j] = columns[name] == cat
    return x


def _resolve_m(spec: int | str, n_features: int) -> int:
    if n_features == 0:
        return 0
    if spec == "sqrt":
        m = math.ceil(math.sqrt(n_features))
    else:
        m = int(spec)
    return min(max(m, 1), n_features)


def train(dataset: Dataset, params: ForestParams) -> TrainedModel:
    """Fit a forest on all non-outcome attributes of the dataset.

    Constant one-hot columns are dropped before any randomness is consumed,
    so a model trained with a constant feature predicts identically to one
    trained without it under the same seed.  Single-class training data
    yields a constant predictor, flagged in ``constant_label``.
    """
    schema = dataset.schema
    outcome = schema.outcome
    if dataset.n == 0:
        raise ParameterError("training split is empty")
    y_col = dataset.column(outcome.name)
    if y_col.size and not np.isin(y_col, (0, 1)).all():
        raise ParameterError("outcome column must be binary")
    feature_attrs = [a for a in schema.attributes if a.role != ROLE_OUTCOME]
    if not feature_attrs:
        raise ParameterError("dataset has no feature attributes")

    all_features = [(a.name, cat) for a in feature_attrs for cat in range(a.k)]
    x_full = _one_hot(dataset.columns, all_features)
    keep = [j for j in range(x_full.shape[1]) if x_full[:, j].min() != x_full[:, j].max()]
    features = tuple(all_features[j] for j in keep)
    x = np.ascontiguousarray(x_full[:, keep]) if keep else np.empty((dataset.n, 0), dtype=np.uint8)
    y = y_col.astype(np.uint8)

    n = dataset.n
    m = _resolve_m(params.features_per_split, x.shape[1])
    depth = params.max_depth if params.max_depth is not None else _UNLIMITED_DEPTH
    tree_seeds = np.random.SeedSequence(params.seed).generate_state(params.n_trees, dtype=np.uint64)

    max_nodes = 2 * n + 1
    trees = []
    for seed in tree_seeds:
        feature = np.empty(max_nodes, dtype=np.int32)
        left = np.empty(max_nodes, dtype=np.int32)
        right = np.empty(max_nodes, dtype=np.int32)
        label = np.empty(max_nodes, dtype=np.int32)
        count = _kernel.grow_tree(
            x, y, feature, left, right, label,
            int(seed), depth, params.min_samples_split, m, params.bootstrap,
        )
        trees.append(
            Tree(
                feature=feature[:count].copy(),
                left=left[:count].copy(),
                right=right[:count].copy(),
                label=label[:count].copy(),
            )
        )

    constant = int(y[0]) if n and (y == y[0]).all() else None
    return TrainedModel(
        params=params,
        features=features,
        feature_domains={a.name: a.k for a in feature_attrs},
        outcome_name=outcome.name,
        trees=tuple(trees),
        constant_label=constant,
    )


class ForestTrainer:
    """Default trainer plugged into the experiment harness.

    Any object with the same two methods can stand in: ``train(dataset,
    params) -> model`` and ``predict(model, columns) -> binary labels``.
    """

    def train(self, dataset: Dataset, params: ForestParams) -> TrainedModel:
        return train(dataset, params)

    def predict(self, model: TrainedModel, data) -> np.ndarray:
        return predict(model, data)


def predict(model: TrainedModel, data: Dataset | dict[str, np.ndarray]) -> np.ndarray:
    """Majority vote over the forest; ties go to label 0."""
    columns = data.columns if isinstance(data, Dataset) else data
    for name, k in model.feature_domains.items():
        if name not in columns:
            raise ParameterError(f"records are missing attribute {name!r}")
        col = np.asarray(columns[name])
        if col.size and (col.min() < 0 or col.max() >= k):
            raise ParameterError(f"attribute {name!r} has indices outside [0, {k})")
    x = _one_hot({n: np.asarray(c) for n, c in columns.items() if n in model.feature_domains}, model.features)
    n = x.shape[0]
    votes = np.zeros(n, dtype=np.int64)
    out = np.empty(n, dtype=np.uint8)
    for tree in model.trees:
        _kernel.predict_tree(tree.feature, tree.left, tree.right, tree.label, x, out)
        votes += out
    return (2 * votes > len(model.trees)).astype(np.int64)
