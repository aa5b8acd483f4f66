# src/reduction/pca.py
"""
Principal component analysis on z-scored features.

The fitted model keeps every axis and ratio; `k` selects how many are used by
transform / inverse_transform.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from src.config import VARIANCE_TARGET
from src.errors import DimensionError, StructureError
from src.features.matrix import FeatureMatrix

_TARGET_SLACK = 1e-12


@dataclass(frozen=True)
class PcaModel:
    feature_names: Tuple[str, ...]
    means: np.ndarray               # (d,)
    scales: np.ndarray              # (d,), population std with zeros replaced by 1
    all_components: np.ndarray      # (d, d), rows are axes, strongest first
    eigenvalues: np.ndarray         # (d,)
    all_ratios: np.ndarray          # (d,), sums to 1
    k: int

    @property
    def components(self) -> np.ndarray:
        return self.all_components[: self.k]

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        return self.all_ratios[: self.k]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def component_names(self) -> Tuple[str, ...]:
        return tuple(f"pc{i + 1}" for i in range(self.k))

    def with_components(self, k: int) -> "PcaModel":
        if not 1 <= k <= self.n_features:
            raise StructureError(f"k must be in [1, {self.n_features}], got {k}")
        return replace(self, k=int(k))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature_names": list(self.feature_names),
            "means": self.means.tolist(),
            "scales": self.scales.tolist(),
            "components": self.all_components.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "explained_variance_ratio": self.all_ratios.tolist(),
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "PcaModel":
        return cls(
            feature_names=tuple(d["feature_names"]),
            means=np.asarray(d["means"], dtype=float),
            scales=np.asarray(d["scales"], dtype=float),
            all_components=np.asarray(d["components"], dtype=float).reshape(len(d["means"]), -1),
            eigenvalues=np.asarray(d["eigenvalues"], dtype=float),
            all_ratios=np.asarray(d["explained_variance_ratio"], dtype=float),
            k=int(d["k"]),
        )


def _as_array(matrix: Union[FeatureMatrix, np.ndarray]) -> np.ndarray:
    return matrix.rows if isinstance(matrix, FeatureMatrix) else np.asarray(matrix, dtype=float)


def fit(matrix: Union[FeatureMatrix, np.ndarray], variance_target: float = VARIANCE_TARGET,
        feature_names: Sequence[str] = ()) -> PcaModel:
    """
    Standardize columns, eigendecompose the population covariance and keep the
    fewest components whose cumulative explained variance reaches the target.
    Each axis is signed so its largest-magnitude entry is positive.
    """
    X = _as_array(matrix)
    if X.ndim != 2 or X.shape[1] < 1:
        raise StructureError("PCA needs a 2-D matrix with at least one column")
    if X.shape[0] < 2:
        raise StructureError(f"PCA needs at least 2 rows, got {X.shape[0]}")
    if not 0.0 < variance_target <= 1.0:
        raise StructureError(f"variance_target must be in (0, 1], got {variance_target}")
    names = matrix.feature_names if isinstance(matrix, FeatureMatrix) else tuple(feature_names)
    if not names:
        names = tuple(f"x{i}" for i in range(X.shape[1]))

    means = X.mean(axis=0)
    scales = X.std(axis=0)
    scales = np.where(scales > 0, scales, 1.0)
    Z = (X - means) / scales
    cov = (Z.T @ Z) / Z.shape[0]

    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")
    evals = np.clip(evals[order], 0.0, None)
    axes = evecs[:, order].T.copy()
    pivot = np.argmax(np.abs(axes), axis=1)
    signs = np.where(axes[np.arange(len(axes)), pivot] < 0, -1.0, 1.0)
    axes *= signs[:, None]

    total = evals.sum()
    if total > 0:
        ratios = evals / total
    else:
        ratios = np.full(len(evals), 1.0 / len(evals))
    cumulative = np.cumsum(ratios)
    k = int(np.searchsorted(cumulative, variance_target - _TARGET_SLACK)) + 1
    k = min(max(k, 1), len(ratios))

    return PcaModel(tuple(names), means, scales, axes, evals, ratios, k)


def transform(model: PcaModel, matrix: Union[FeatureMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(matrix, FeatureMatrix) and matrix.feature_names != model.feature_names:
        raise DimensionError(_name_mismatch(model.feature_names, matrix.feature_names))
    X = np.atleast_2d(_as_array(matrix))
    if X.shape[1] != model.n_features:
        raise DimensionError(f"expected {model.n_features} features, got {X.shape[1]}")
    return ((X - model.means) / model.scales) @ model.components.T


def inverse_transform(model: PcaModel, reduced: np.ndarray) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(reduced, dtype=float))
    if Y.shape[1] != model.k:
        raise DimensionError(f"expected {model.k} reduced columns, got {Y.shape[1]}")
    return (Y @ model.components) * model.scales + model.means


def _name_mismatch(expected: Sequence[str], got: Sequence[str]) -> str:
    missing = [n for n in expected if n not in set(got)]
    extra = [n for n in got if n not in set(expected)]
    if not missing and not extra:
        return "feature columns are in a different order than at fit time"
    parts = []
    if missing:
        parts.append(f"missing {missing}")
    if extra:
        parts.append(f"unexpected {extra}")
    return "feature names differ from fit: " + "; ".join(parts)
