# src/forest/ensemble.py
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from src.config import N_JOBS, N_TREES, SEED
from src.errors import ConfigError, DataError, DegenerateClassifierError, DimensionError
from src.features.matrix import FeatureMatrix
from src.forest.tree import DecisionTree, train_tree
from src.reduction import pca as pca_mod
from src.reduction.pca import PcaModel
from src.utils.seeding import BOOTSTRAP, TREE, derive_rng

logger = logging.getLogger(__name__)

CLASSES = (0, 1)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = N_TREES
    max_depth: Optional[int] = None         # None = grow until pure
    min_samples_leaf: int = 1
    mtry: Optional[int] = None              # None = ceil(sqrt(d))
    bootstrap_size: Optional[int] = None    # None = n training rows
    bootstrap: bool = True                  # False draws without replacement
    seed: int = SEED

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError(f"max_depth must be >= 0, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ConfigError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.bootstrap_size is not None and self.bootstrap_size < 1:
            raise ConfigError(f"bootstrap_size must be >= 1, got {self.bootstrap_size}")

    def resolve_mtry(self, d: int) -> int:
        mtry = self.mtry if self.mtry is not None else math.ceil(math.sqrt(d))
        if not 1 <= mtry <= d:
            raise ConfigError(f"mtry must be in [1, {d}], got {mtry}")
        return mtry

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ForestParams":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


class Prediction(NamedTuple):
    label: int
    votes: Tuple[int, int]

    @property
    def vote_fraction(self) -> float:
        return self.votes[1] / (self.votes[0] + self.votes[1])


@dataclass(frozen=True)
class ForestModel:
    params: ForestParams
    trees: Tuple[DecisionTree, ...]
    feature_names: Tuple[str, ...]          # columns the trees split on
    pca: Optional[PcaModel] = None          # applied to raw inputs first when present
    classes: Tuple[int, int] = CLASSES

    def __post_init__(self):
        if len(self.trees) != self.params.n_trees:
            raise DimensionError(f"{len(self.trees)} trees for n_trees={self.params.n_trees}")
        d = len(self.feature_names)
        if any(t.max_feature_index() >= d for t in self.trees):
            raise DimensionError(f"a tree splits on a feature index >= {d}")

    @property
    def input_names(self) -> Tuple[str, ...]:
        return self.pca.feature_names if self.pca is not None else self.feature_names

    def votes(self, X_tree: np.ndarray) -> np.ndarray:
        """(n, 2) vote counts over tree-space rows."""
        X_tree = np.atleast_2d(np.asarray(X_tree, dtype=float))
        ones = np.zeros(X_tree.shape[0], dtype=np.int64)
        for tree in self.trees:
            ones += tree.predict(X_tree)
        return np.column_stack([len(self.trees) - ones, ones])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "feature_names": list(self.feature_names),
            "classes": list(self.classes),
            "trees": [t.to_nested() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any], pca: Optional[PcaModel] = None) -> "ForestModel":
        return cls(
            params=ForestParams.from_dict(d["params"]),
            trees=tuple(DecisionTree.from_nested(t) for t in d["trees"]),
            feature_names=tuple(d["feature_names"]),
            pca=pca,
            classes=tuple(d["classes"]),
        )


def tree_rng(seed: int, t: int) -> np.random.Generator:
    """Feature-draw stream of tree t."""
    return derive_rng(seed, t, TREE)


def _grow(X: np.ndarray, y: np.ndarray, params: ForestParams, t: int, size: int) -> DecisionTree:
    brng = derive_rng(params.seed, t, BOOTSTRAP)
    n = len(y)
    rows = brng.integers(0, n, size=size) if params.bootstrap else brng.permutation(n)[:size]
    return train_tree(X[rows], y[rows], params, tree_rng(params.seed, t))


def train_forest(X: np.ndarray, y: np.ndarray, params: ForestParams = ForestParams(),
                 sample_ids: Optional[Sequence[str]] = None,
                 feature_names: Optional[Sequence[str]] = None,
                 n_jobs: int = N_JOBS) -> ForestModel:
    """
    Bagged CART ensemble. Rows are put in canonical sample_id order before any
    draw and each tree depends only on (data, params, tree index), so the
    model does not depend on input row order or on n_jobs.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise DimensionError(f"X has shape {X.shape} for {len(y)} labels")
    if len(y) < 2:
        raise DataError(f"need at least 2 training rows, got {len(y)}")
    present = np.unique(y)
    if len(present) < 2:
        raise DegenerateClassifierError(
            f"refusing to train a degenerate classifier: training set holds only class {int(present[0])}")
    if not np.isin(present, CLASSES).all():
        raise DataError(f"labels must be 0 or 1, found {present.tolist()}")

    if sample_ids is not None:
        if len(sample_ids) != len(y):
            raise DimensionError(f"{len(sample_ids)} sample ids for {len(y)} rows")
        order = np.argsort(np.asarray(sample_ids, dtype=str), kind="stable")
        X, y = X[order], y[order]

    size = params.bootstrap_size or len(y)
    if not params.bootstrap and size > len(y):
        raise ConfigError(f"bootstrap_size {size} exceeds {len(y)} rows when sampling without replacement")
    params.resolve_mtry(X.shape[1])

    if n_jobs == 1:
        trees = [_grow(X, y, params, t, size) for t in range(params.n_trees)]
    else:
        trees = Parallel(n_jobs=n_jobs)(delayed(_grow)(X, y, params, t, size) for t in range(params.n_trees))
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    logger.info("trained %d trees on %d rows x %d features", params.n_trees, X.shape[0], X.shape[1])
    return ForestModel(params=params, trees=tuple(trees), feature_names=names)


# ---------------------------
# Prediction
# ---------------------------

def _to_tree_space(model: ForestModel, X: Union[np.ndarray, FeatureMatrix]) -> np.ndarray:
    width = X.rows.shape[1] if isinstance(X, FeatureMatrix) else np.atleast_2d(X).shape[1]
    if width != len(model.input_names):
        raise DimensionError(f"model expects {len(model.input_names)} features, got {width}")
    if model.pca is not None:
        return pca_mod.transform(model.pca, X)
    return X.rows if isinstance(X, FeatureMatrix) else np.atleast_2d(np.asarray(X, dtype=float))


def _decide(votes: np.ndarray) -> np.ndarray:
    # a tied vote goes to class 0
    return (votes[:, 1] > votes[:, 0]).astype(np.int64)


def predict(model: ForestModel, x: Sequence[float]) -> Prediction:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("predict takes a single feature row")
    votes = model.votes(_to_tree_space(model, x[None, :]))
    return Prediction(int(_decide(votes)[0]), (int(votes[0, 0]), int(votes[0, 1])))


def predict_batch(model: ForestModel, X: Union[np.ndarray, FeatureMatrix]) -> Tuple[np.ndarray, np.ndarray]:
    """Classes and (n, 2) vote counts for every row."""
    votes = model.votes(_to_tree_space(model, X))
    return _decide(votes), votes
