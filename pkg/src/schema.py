from typing import Any, Dict, List

from src.errors import ModelFormatError

# ---------------------------
# CSV layouts
# ---------------------------

TRACE_COLUMNS = ["panel_id", "timestamp", "current_a", "label"]
TRACE_REQUIRED = ["panel_id", "timestamp", "current_a"]
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%S"
CSV_FLOAT_FORMAT = "%.17g"  # shortest width that round-trips every float64

BAND_COLUMNS = ["band", "index", "value"]
FEATURE_LEAD_COLUMNS = ["sample_id", "label"]
PREDICTION_COLUMNS = ["sample_id", "predicted_class", "votes_0", "votes_1"]
REPORT_COLUMNS = ["metric", "class", "value"]

# ---------------------------
# Model document
# ---------------------------

MODEL_FORMAT_VERSION = 1
SUPPORTED_FORMAT_VERSIONS = (1,)

model_schema: Dict[str, Any] = {
    "format_version": int,
    "created_at": str,
    "pipeline": {
        "wavelet": str,
        "levels": int,
        "boundary": str,
        "window_len": int,
        "max_gap": int,
        "variance_target": float,
        "stats": list,
        "feature_names": list,
    },
    "pca": {
        "feature_names": list,
        "means": list,
        "scales": list,
        "components": list,
        "eigenvalues": list,
        "explained_variance_ratio": list,
        "k": int,
    },
    "forest": {
        "params": dict,
        "feature_names": list,
        "classes": list,
        "trees": list,
    },
    "training": {
        "n_samples": int,
        "seed": int,
        "class_counts": list,
    },
}


def _check(doc: Any, layout: Dict[str, Any], path: str, problems: List[str]) -> None:
    if not isinstance(doc, dict):
        problems.append(f"{path or 'document'} is not an object")
        return
    for key, expected in layout.items():
        where = f"{path}.{key}" if path else key
        if key not in doc:
            problems.append(f"missing {where}")
        elif isinstance(expected, dict):
            _check(doc[key], expected, where, problems)
        elif expected is float:
            if not isinstance(doc[key], (int, float)) or isinstance(doc[key], bool):
                problems.append(f"{where} must be a number")
        elif not isinstance(doc[key], expected) or (expected is int and isinstance(doc[key], bool)):
            problems.append(f"{where} must be {expected.__name__}")


def validate_model_document(doc: Any) -> None:
    """Reject unknown format versions first, then any structural drift from `model_schema`."""
    version = doc.get("format_version") if isinstance(doc, dict) else None
    if version not in SUPPORTED_FORMAT_VERSIONS:
        raise ModelFormatError(
            f"unsupported model format_version {version!r}; supported: {list(SUPPORTED_FORMAT_VERSIONS)}")
    problems: List[str] = []
    _check(doc, model_schema, "", problems)
    if problems:
        raise ModelFormatError("invalid model document: " + "; ".join(problems))
