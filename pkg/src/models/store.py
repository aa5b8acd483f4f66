# src/models/store.py
from __future__ import annotations

import datetime as dt
import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict

from src.config import PipelineSettings
from src.errors import ModelFormatError
from src.forest.ensemble import ForestModel
from src.reduction.pca import PcaModel
from src.schema import MODEL_FORMAT_VERSION, validate_model_document

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelDocument:
    model: ForestModel
    pipeline: PipelineSettings
    training: Dict[str, Any] = field(default_factory=dict)
    created_at: str = ""
    format_version: int = MODEL_FORMAT_VERSION


# ---------------------------
# Helpers
# ---------------------------

def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).replace(microsecond=0).isoformat()


def fingerprint(forest_doc: Dict[str, Any]) -> str:
    """Short hash of the forest section; equal models give equal fingerprints."""
    canon = json.dumps(forest_doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(canon.encode("utf-8")).hexdigest()[:12]


def to_document(doc: ModelDocument) -> Dict[str, Any]:
    model = doc.model
    if model.pca is None:
        raise ModelFormatError("only models with an embedded PCA stage can be saved")
    forest = model.to_dict()
    pipeline = doc.pipeline.to_dict()
    pipeline["feature_names"] = list(model.pca.feature_names)
    return {
        "format_version": doc.format_version,
        "created_at": doc.created_at or _now(),
        "fingerprint": fingerprint(forest),
        "pipeline": pipeline,
        "pca": model.pca.to_dict(),
        "forest": forest,
        "training": dict(doc.training),
    }


def from_document(raw: Dict[str, Any]) -> ModelDocument:
    validate_model_document(raw)
    try:
        pca = PcaModel.from_dict(raw["pca"])
        model = ForestModel.from_dict(raw["forest"], pca=pca)
        pipeline = PipelineSettings.from_dict(raw["pipeline"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"model document is corrupt: {exc}") from exc
    if tuple(raw["pipeline"]["feature_names"]) != pca.feature_names:
        raise ModelFormatError("pipeline feature_names disagree with the PCA stage")
    return ModelDocument(model=model, pipeline=pipeline, training=raw["training"],
                         created_at=raw["created_at"], format_version=raw["format_version"])


# ---------------------------
# Public API
# ---------------------------

def save_model(doc: ModelDocument, path: str) -> Dict[str, Any]:
    payload = to_document(doc)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, allow_nan=False)
        fh.write("\n")
    logger.info("saved model %s (%d trees) to %s", payload["fingerprint"], doc.model.params.n_trees, path)
    return payload


def load_model(path: str) -> ModelDocument:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ModelFormatError(f"model file not found: {path}")
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"model file {path} is not valid JSON: {exc}")
    return from_document(raw)
