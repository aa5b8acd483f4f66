# src/ingest/telemetry.py
from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from typing import IO, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.errors import DataError
from src.schema import TRACE_COLUMNS, TRACE_REQUIRED, TIMESTAMP_FORMAT, CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)

NEGATIVE_TOLERANCE_A = 0.1

Source = Union[str, bytes, IO[bytes], IO[str]]


@dataclass(frozen=True)
class CurrentTrace:
    panel_id: str
    timestamps: np.ndarray          # datetime64[s], strictly increasing
    currents: np.ndarray            # float64 amperes
    label: Optional[int] = None     # 0 healthy, 1 snail trail

    def __post_init__(self):
        if len(self.timestamps) != len(self.currents):
            raise DataError(f"{self.panel_id}: timestamps and currents differ in length")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > np.timedelta64(0, "s")):
            raise DataError(f"{self.panel_id}: timestamps are not strictly increasing")
        if not np.all(np.isfinite(self.currents)):
            raise DataError(f"{self.panel_id}: non-finite current values")
        if self.label not in (None, 0, 1):
            raise DataError(f"{self.panel_id}: label must be 0 or 1, got {self.label!r}")

    def __len__(self) -> int:
        return len(self.currents)


# ---------------------------
# Helpers
# ---------------------------

def _open_source(source: Source):
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(bytes(source))
    return source


def _line_of(index: int) -> int:
    # header is line 1, first data row line 2
    return int(index) + 2


def _to_float(text: str) -> float:
    # float() rounds correctly, so %.17g text comes back bit-identical
    try:
        return float(text)
    except ValueError:
        return float("nan")


def _read_frame(source: Source) -> pd.DataFrame:
    try:
        df = pd.read_csv(_open_source(source), dtype=str, keep_default_na=False,
                         encoding="utf-8", skipinitialspace=True)
    except FileNotFoundError:
        raise DataError(f"input file not found: {source}")
    except pd.errors.EmptyDataError:
        raise DataError("input is empty; expected a header row")
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"malformed CSV: {exc}")

    missing = [c for c in TRACE_REQUIRED if c not in df.columns]
    if missing:
        raise DataError(f"missing columns {missing}; expected header {','.join(TRACE_COLUMNS)}", line=1)
    if "label" not in df.columns:
        df["label"] = ""
    return df.fillna("")


def _first_bad(mask: np.ndarray) -> Optional[int]:
    bad = np.flatnonzero(mask)
    return int(bad[0]) if bad.size else None


# ---------------------------
# Public API
# ---------------------------

def parse_trace_csv(source: Source) -> List[CurrentTrace]:
    """
    Parse `panel_id,timestamp,current_a[,label]` telemetry into one trace per panel.
    - rows are grouped by panel and sorted by timestamp
    - duplicate (panel_id, timestamp) rows, unparsable fields and currents below
      -0.1 A raise DataError naming the offending line
    - small negative readings are clamped to 0
    """
    df = _read_frame(source)
    if df.empty:
        return []

    panel = df["panel_id"].str.strip()
    if (i := _first_bad((panel == "").to_numpy())) is not None:
        raise DataError("empty panel_id", line=_line_of(i))

    ts = pd.to_datetime(df["timestamp"].str.strip(), format="ISO8601", errors="coerce")
    if (i := _first_bad(ts.isna().to_numpy())) is not None:
        raise DataError(f"unparsable timestamp {df['timestamp'].iloc[i]!r}", line=_line_of(i))
    if getattr(ts.dt, "tz", None) is not None:
        ts = ts.dt.tz_localize(None)

    cur = df["current_a"].str.strip().map(_to_float).to_numpy(dtype=float)
    if (i := _first_bad(~np.isfinite(cur))) is not None:
        raise DataError(f"current_a {df['current_a'].iloc[i]!r} is not a finite number", line=_line_of(i))
    if (i := _first_bad(cur < -NEGATIVE_TOLERANCE_A)) is not None:
        raise DataError(f"negative current {cur[i]} A beyond -{NEGATIVE_TOLERANCE_A} A tolerance",
                        line=_line_of(i))
    clamped = int(np.count_nonzero(cur < 0))
    if clamped:
        logger.info("clamped %d slightly negative current readings to 0", clamped)
        cur = np.where(cur < 0, 0.0, cur)

    raw_label = df["label"].str.strip()
    if (i := _first_bad((~raw_label.isin(["", "0", "1"])).to_numpy())) is not None:
        raise DataError(f"label must be 0, 1 or empty, got {raw_label.iloc[i]!r}", line=_line_of(i))

    frame = pd.DataFrame({
        "panel_id": panel,
        "timestamp": ts.dt.floor("s"),
        "current_a": cur,
        "label": raw_label,
        "line": np.arange(len(df)) + 2,
    })
    dup = frame.duplicated(["panel_id", "timestamp"], keep="first").to_numpy()
    if (i := _first_bad(dup)) is not None:
        raise DataError(f"duplicate reading for panel {frame['panel_id'].iloc[i]!r} at "
                        f"{frame['timestamp'].iloc[i].strftime(TIMESTAMP_FORMAT)}", line=_line_of(i))

    traces: List[CurrentTrace] = []
    for panel_id, grp in frame.sort_values(["panel_id", "timestamp"], kind="stable").groupby("panel_id", sort=True):
        labels = set(grp["label"]) - {""}
        if len(labels) > 1:
            raise DataError(f"panel {panel_id!r} carries conflicting labels {sorted(labels)}",
                            line=int(grp["line"].iloc[0]))
        if labels and (grp["label"] == "").any():
            logger.warning("panel %s has unlabeled rows; using label %s", panel_id, next(iter(labels)))
        traces.append(CurrentTrace(
            panel_id=str(panel_id),
            timestamps=grp["timestamp"].to_numpy(dtype="datetime64[s]"),
            currents=grp["current_a"].to_numpy(dtype=float),
            label=int(next(iter(labels))) if labels else None,
        ))
    logger.info("parsed %d rows into %d panel traces", len(frame), len(traces))
    return traces


def write_windows_csv(windows: Sequence, path_or_buf) -> None:
    """Write DayWindows in the ingest schema, one row per minute, floats at 17 significant digits so they parse back exactly."""
    frames = []
    for w in windows:
        start = np.datetime64(w.date.isoformat(), "m") + np.timedelta64(w.offset, "m")
        stamps = start + np.arange(len(w.values)).astype("timedelta64[m]")
        frames.append(pd.DataFrame({
            "panel_id": w.panel_id,
            "timestamp": np.datetime_as_string(stamps.astype("datetime64[s]"), unit="s"),
            "current_a": np.asarray(w.values, dtype=float),
            "label": pd.array([w.label] * len(w.values), dtype="Int64"),
        }))
    if frames:
        out = pd.concat(frames, ignore_index=True)
    else:
        out = pd.DataFrame({c: pd.Series(dtype=object) for c in TRACE_COLUMNS})
    out.to_csv(path_or_buf, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
