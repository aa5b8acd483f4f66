import json
import os
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Optional, Tuple

from dotenv import load_dotenv

from src.errors import ConfigError

load_dotenv()


def _opt_float(name: str) -> Optional[float]:
    raw = os.getenv(name, "").strip()
    return float(raw) if raw else None


# Signal pipeline
WAVELET = os.getenv("PVFF_WAVELET", "db4")
LEVELS = int(os.getenv("PVFF_LEVELS", "5"))
BOUNDARY = os.getenv("PVFF_BOUNDARY", "symmetric")
WINDOW_LEN = int(os.getenv("PVFF_WINDOW_LEN", "1440"))
MAX_GAP = int(os.getenv("PVFF_MAX_GAP", "5"))
DAYLIGHT_THRESHOLD = _opt_float("PVFF_DAYLIGHT_THRESHOLD")
VARIANCE_TARGET = float(os.getenv("PVFF_VARIANCE_TARGET", "0.95"))

# Forest / evaluation
N_TREES = int(os.getenv("PVFF_N_TREES", "100"))
SEED = int(os.getenv("PVFF_SEED", "42"))
N_JOBS = int(os.getenv("PVFF_N_JOBS", "1"))
TEST_FRACTION = float(os.getenv("PVFF_TEST_FRACTION", "0.3"))

LOG_LEVEL = os.getenv("PVFF_LOG_LEVEL", "INFO")

STAT_NAMES: Tuple[str, ...] = (
    "mean", "std", "rms", "skewness", "kurtosis", "min", "max",
    "median", "energy", "entropy", "zero_crossings",
)


@dataclass(frozen=True)
class PipelineSettings:
    """Everything needed to turn a CSV into feature rows; frozen into saved models."""
    wavelet: str = WAVELET
    levels: int = LEVELS
    boundary: str = BOUNDARY
    window_len: int = WINDOW_LEN
    max_gap: int = MAX_GAP
    daylight_threshold: Optional[float] = DAYLIGHT_THRESHOLD
    variance_target: float = VARIANCE_TARGET
    stats: Tuple[str, ...] = field(default=STAT_NAMES)

    def __post_init__(self):
        if self.boundary not in ("symmetric", "periodic"):
            raise ConfigError(f"boundary must be 'symmetric' or 'periodic', got {self.boundary!r}")
        if self.window_len < 2:
            raise ConfigError("window_len must be >= 2")
        if self.max_gap < 0:
            raise ConfigError("max_gap must be >= 0")
        if not 0.0 < self.variance_target <= 1.0:
            raise ConfigError("variance_target must be in (0, 1]")
        unknown = [s for s in self.stats if s not in STAT_NAMES]
        if unknown or not self.stats:
            raise ConfigError(f"unknown or empty statistic set: {unknown}")
        object.__setattr__(self, "stats", tuple(self.stats))

    def to_dict(self) -> Dict[str, Any]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["stats"] = list(self.stats)
        return d

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "PipelineSettings":
        known = {f.name for f in fields(cls)}
        return cls(**{k: (tuple(v) if k == "stats" else v) for k, v in d.items() if k in known})


# ---------------------------
# Run configuration files
# ---------------------------

def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """Read a flat JSON object of overrides; missing path means no overrides."""
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def route_overrides(values: Dict[str, Any], *targets: type) -> Tuple[Dict[str, Any], ...]:
    """
    Split a flat override mapping into one kwargs dict per dataclass in `targets`.
    - a key goes to every target declaring a field of that name (`seed` is shared)
    - keys no target declares raise ConfigError
    """
    buckets: Tuple[Dict[str, Any], ...] = tuple({} for _ in targets)
    unknown = []
    for key, val in values.items():
        hit = False
        for bucket, target in zip(buckets, targets):
            if key in {f.name for f in fields(target)}:
                bucket[key] = val
                hit = True
        if not hit:
            unknown.append(key)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return buckets
