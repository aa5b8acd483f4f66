# src/workflows.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.config import N_JOBS, PipelineSettings
from src.errors import DataError, DegenerateClassifierError, DimensionError
from src.evaluation.metrics import EvalReport, evaluate
from src.evaluation.split import split_stratified
from src.features.matrix import FeatureMatrix, build_matrix, feature_names
from src.forest.ensemble import ForestModel, ForestParams, predict_batch, train_forest
from src.ingest.telemetry import Source, parse_trace_csv
from src.ingest.windowing import DayWindow, windows_from_traces
from src.models.store import ModelDocument
from src.reduction import pca as pca_mod
from src.utils.log import stage
from src.wavelets.dwt import WaveletDecomposition, dwt_forward

logger = logging.getLogger(__name__)

# settings that change what a feature column means
_FEATURE_FIELDS = ("wavelet", "levels", "boundary", "window_len", "stats")


@dataclass
class TrainResult:
    document: ModelDocument
    report: Optional[EvalReport] = None
    baseline: Optional[EvalReport] = None
    timings: Dict[str, float] = field(default_factory=dict)


# ---------------------------
# Data preparation
# ---------------------------

def load_windows(source: Source, settings: PipelineSettings,
                 timings: Optional[Dict[str, float]] = None) -> List[DayWindow]:
    with stage("ingest", timings):
        traces = parse_trace_csv(source)
        windows = windows_from_traces(traces, settings.window_len, settings.max_gap,
                                      settings.daylight_threshold)
    logger.info("%d day windows from %d panels", len(windows), len(traces))
    return windows


def featurize(windows: List[DayWindow], settings: PipelineSettings, n_jobs: int = N_JOBS,
              timings: Optional[Dict[str, float]] = None) -> FeatureMatrix:
    names = feature_names(settings.levels, settings.stats)
    if not windows:
        return FeatureMatrix(names, np.empty((0, len(names))), ())
    with stage("features", timings):
        return build_matrix(windows, settings.wavelet, settings.levels, settings.boundary,
                            settings.stats, n_jobs=n_jobs)


def decompose_window(window: DayWindow, settings: PipelineSettings) -> WaveletDecomposition:
    return dwt_forward(window.values, settings.wavelet, settings.levels, settings.boundary)


def check_compatible(model_settings: PipelineSettings, data_settings: PipelineSettings) -> None:
    diff = [f"{name}: model {getattr(model_settings, name)!r} vs data {getattr(data_settings, name)!r}"
            for name in _FEATURE_FIELDS if getattr(model_settings, name) != getattr(data_settings, name)]
    if diff:
        raise DimensionError("feature configuration differs from the model's: " + "; ".join(diff))


# ---------------------------
# Training
# ---------------------------

def fit_model(train: FeatureMatrix, settings: PipelineSettings, params: ForestParams,
              n_jobs: int = N_JOBS, timings: Optional[Dict[str, float]] = None) -> ForestModel:
    """PCA fitted on the given rows only, then the forest on their projection."""
    y = train.require_labels()
    with stage("pca", timings):
        reducer = pca_mod.fit(train, settings.variance_target)
        Z = pca_mod.transform(reducer, train)
    logger.info("PCA keeps %d of %d components (%.1f%% variance)", reducer.k, reducer.n_features,
                100.0 * float(reducer.explained_variance_ratio.sum()))
    with stage("forest", timings):
        forest = train_forest(Z, y, params, sample_ids=train.sample_ids,
                              feature_names=reducer.component_names(), n_jobs=n_jobs)
    return replace(forest, pca=reducer)


def single_tree_params(params: ForestParams, d: int) -> ForestParams:
    return ForestParams(n_trees=1, max_depth=params.max_depth, min_samples_leaf=params.min_samples_leaf,
                        mtry=d, bootstrap=False, seed=params.seed)


def train(matrix: FeatureMatrix, settings: PipelineSettings, params: ForestParams,
          holdout: Optional[float] = None, baseline: bool = False, n_jobs: int = N_JOBS,
          timings: Optional[Dict[str, float]] = None) -> TrainResult:
    timings = {} if timings is None else timings
    y = matrix.require_labels()
    classes = np.unique(y)
    if len(classes) < 2:
        raise DegenerateClassifierError(
            f"refusing to train a degenerate classifier: all {len(y)} samples are class {int(classes[0])}")

    if holdout:
        train_rows, test_rows = split_stratified(matrix, holdout, params.seed)
    else:
        train_rows, test_rows = matrix, None

    model = fit_model(train_rows, settings, params, n_jobs, timings)
    training = {
        "n_samples": train_rows.n_samples,
        "seed": params.seed,
        "class_counts": np.bincount(train_rows.labels, minlength=2).tolist(),
        "holdout": holdout,
    }
    result = TrainResult(ModelDocument(model=model, pipeline=settings, training=training), timings=timings)

    if test_rows is not None:
        with stage("predict", timings):
            predicted, _ = predict_batch(model, test_rows)
        result.report = evaluate(test_rows.labels, predicted)
        logger.info("holdout macro F1 %.4f on %d samples", result.report.f_score, test_rows.n_samples)
        if baseline:
            Z = pca_mod.transform(model.pca, train_rows)
            tree = train_forest(Z, train_rows.labels, single_tree_params(params, model.pca.k),
                                sample_ids=train_rows.sample_ids, feature_names=model.feature_names)
            single, _ = predict_batch(replace(tree, pca=model.pca), test_rows)
            result.baseline = evaluate(test_rows.labels, single)
            logger.info("single-tree baseline macro F1 %.4f", result.baseline.f_score)
    return result


# ---------------------------
# Inference
# ---------------------------

def prepare_for_model(source: Source, doc: ModelDocument, data_settings: Optional[PipelineSettings] = None,
                      n_jobs: int = N_JOBS, timings: Optional[Dict[str, float]] = None) -> FeatureMatrix:
    """Features of `source` computed with the model's stored pipeline; nothing is refit."""
    settings = doc.pipeline
    if data_settings is not None:
        check_compatible(doc.pipeline, data_settings)
    windows = load_windows(source, settings, timings)
    return featurize(windows, settings, n_jobs, timings)


def predict_rows(doc: ModelDocument, matrix: FeatureMatrix,
                 timings: Optional[Dict[str, float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    with stage("predict", timings):
        return predict_batch(doc.model, matrix)


def evaluate_model(doc: ModelDocument, matrix: FeatureMatrix) -> EvalReport:
    y = matrix.require_labels()
    if matrix.n_samples == 0:
        raise DataError("no labeled windows to evaluate")
    predicted, _ = predict_rows(doc, matrix)
    return evaluate(y, predicted)
