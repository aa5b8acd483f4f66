# src/features/matrix.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.config import BOUNDARY, N_JOBS, STAT_NAMES
from src.errors import DimensionError, PvffError, StructureError
from src.features.stats import band_stats, select
from src.ingest.windowing import DayWindow
from src.schema import CSV_FLOAT_FORMAT, FEATURE_LEAD_COLUMNS
from src.wavelets.dwt import WaveletDecomposition, band_names, dwt_forward
from src.wavelets.filters import WaveletSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureVector:
    names: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise DimensionError(f"{len(self.names)} names for {len(self.values)} values")
        if len(set(self.names)) != len(self.names):
            raise DimensionError("feature names must be unique")
        if not np.all(np.isfinite(self.values)):
            raise StructureError("feature vector holds non-finite values")


@dataclass(frozen=True)
class FeatureMatrix:
    feature_names: Tuple[str, ...]
    rows: np.ndarray                      # (n_samples, n_features)
    sample_ids: Tuple[str, ...]
    labels: Optional[np.ndarray] = None   # int 0/1 per row

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            rows = rows.reshape(len(self.sample_ids), len(self.feature_names))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        if rows.shape[1] != len(self.feature_names):
            raise DimensionError(f"{rows.shape[1]} columns for {len(self.feature_names)} feature names")
        if rows.shape[0] != len(self.sample_ids):
            raise DimensionError(f"{rows.shape[0]} rows for {len(self.sample_ids)} sample ids")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (rows.shape[0],):
                raise DimensionError(f"{labels.size} labels for {rows.shape[0]} rows")
            if not np.isin(labels, (0, 1)).all():
                raise StructureError("labels must be 0 or 1")
            object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    def take(self, index: Sequence[int]) -> "FeatureMatrix":
        index = np.asarray(index, dtype=np.int64)
        return FeatureMatrix(
            feature_names=self.feature_names,
            rows=self.rows[index],
            sample_ids=tuple(self.sample_ids[i] for i in index),
            labels=None if self.labels is None else self.labels[index],
        )

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise PvffError("input carries no labels; a labeled CSV is required")
        return self.labels

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.rows, columns=list(self.feature_names))
        labels = [None] * self.n_samples if self.labels is None else self.labels.tolist()
        df.insert(0, "label", pd.array(labels, dtype="Int64"))
        df.insert(0, "sample_id", list(self.sample_ids))
        return df

    def to_csv(self, path_or_buf) -> None:
        self.to_frame().to_csv(path_or_buf, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def feature_names(levels: int, stats: Sequence[str] = STAT_NAMES) -> Tuple[str, ...]:
    return tuple(f"{band}_{stat}" for band in band_names(levels) for stat in stats)


def extract_features(decomp: WaveletDecomposition, stats: Sequence[str] = STAT_NAMES) -> FeatureVector:
    values: List[float] = []
    for band, coeffs in decomp.bands():
        if len(coeffs) == 0:
            raise StructureError(f"band {band} is empty")
        values.extend(select(band_stats(coeffs), stats))
    return FeatureVector(feature_names(decomp.levels, stats), np.asarray(values, dtype=float))


def _row(window: DayWindow, wavelet, levels: int, mode: str, stats: Sequence[str]) -> np.ndarray:
    try:
        return extract_features(dwt_forward(window.values, wavelet, levels, mode), stats).values
    except PvffError as exc:
        raise type(exc)(f"{window.sample_id}: {exc}") from exc


def build_matrix(samples: Sequence[DayWindow], wavelet: Union[str, WaveletSpec], levels: int,
                 mode: str = BOUNDARY, stats: Sequence[str] = STAT_NAMES, n_jobs: int = N_JOBS) -> FeatureMatrix:
    """One feature row per window, in input order whatever the degree of parallelism."""
    if not samples:
        raise StructureError("build_matrix needs at least one window")
    if n_jobs == 1:
        rows = [_row(w, wavelet, levels, mode, stats) for w in samples]
    else:
        rows = Parallel(n_jobs=n_jobs)(delayed(_row)(w, wavelet, levels, mode, stats) for w in samples)

    labels = [w.label for w in samples]
    if all(l is not None for l in labels):
        label_arr = np.asarray(labels, dtype=np.int64)
    else:
        if any(l is not None for l in labels):
            logger.warning("only %d of %d windows are labeled; dropping labels",
                           sum(l is not None for l in labels), len(labels))
        label_arr = None
    return FeatureMatrix(
        feature_names=feature_names(levels, stats),
        rows=np.vstack(rows),
        sample_ids=tuple(w.sample_id for w in samples),
        labels=label_arr,
    )
