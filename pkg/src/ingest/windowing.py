# src/ingest/windowing.py
from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from src.config import MAX_GAP, WINDOW_LEN
from src.errors import DataError, EmptyWindowError
from src.ingest.telemetry import CurrentTrace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DayWindow:
    panel_id: str
    date: dt.date
    values: np.ndarray
    label: Optional[int] = None
    imputed: int = 0        # minutes filled by interpolation
    offset: int = 0         # minute of day of values[0]; nonzero after daylight trimming

    @property
    def sample_id(self) -> str:
        return f"{self.panel_id}@{self.date.isoformat()}"

    def __len__(self) -> int:
        return len(self.values)


def _longest_run(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    padded = np.concatenate(([0], mask.astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    return int((edges[1::2] - edges[::2]).max())


def window_daily(trace: CurrentTrace, window_len: int = WINDOW_LEN, max_gap: int = MAX_GAP) -> List[DayWindow]:
    """
    Cut a trace into one window per calendar day, slot i = minute i of the day.
    Days missing more than `max_gap` minutes, or with a longer consecutive gap,
    are dropped and logged; shorter gaps are linearly interpolated.
    """
    if window_len < 2:
        raise DataError("window_len must be >= 2")
    if len(trace) == 0:
        raise DataError(f"{trace.panel_id}: empty trace")

    days = trace.timestamps.astype("datetime64[D]")
    minutes = ((trace.timestamps - days.astype("datetime64[s]")) // np.timedelta64(60, "s")).astype(np.int64)

    windows: List[DayWindow] = []
    for day in np.unique(days):
        sel = np.flatnonzero(days == day)
        slots = minutes[sel]
        inside = slots < window_len
        if not inside.all():
            logger.debug("%s %s: ignoring %d readings past minute %d",
                         trace.panel_id, day, int((~inside).sum()), window_len)
        sel, slots = sel[inside], slots[inside]

        values = np.full(window_len, np.nan)
        # first reading wins when several land in one minute
        uniq, first = np.unique(slots, return_index=True)
        values[uniq] = trace.currents[sel[first]]

        missing = np.isnan(values)
        n_missing = int(missing.sum())
        run = _longest_run(missing)
        if run > max_gap:
            logger.info("dropping %s@%s: gap of %d consecutive minutes exceeds max_gap=%d",
                        trace.panel_id, day, run, max_gap)
            continue
        if n_missing > max_gap:
            logger.info("dropping %s@%s: %d missing minutes exceed max_gap=%d",
                        trace.panel_id, day, n_missing, max_gap)
            continue
        if n_missing:
            present = np.flatnonzero(~missing)
            values[missing] = np.interp(np.flatnonzero(missing), present, values[present])

        windows.append(DayWindow(
            panel_id=trace.panel_id,
            date=day.astype(object),
            values=values,
            label=trace.label,
            imputed=n_missing,
        ))
    return windows


def daylight_filter(window: DayWindow, threshold: float) -> DayWindow:
    """Trim leading/trailing samples below `threshold`; the interior is left as is."""
    if threshold < 0:
        raise DataError(f"daylight threshold must be >= 0, got {threshold}")
    lit = np.flatnonzero(window.values >= threshold)
    if lit.size == 0:
        raise EmptyWindowError(f"{window.sample_id}: every sample is below {threshold} A")
    start, stop = int(lit[0]), int(lit[-1]) + 1
    if start == 0 and stop == len(window.values):
        return window
    return replace(window, values=window.values[start:stop].copy(), offset=window.offset + start)


def windows_from_traces(traces: List[CurrentTrace], window_len: int = WINDOW_LEN, max_gap: int = MAX_GAP,
                        daylight_threshold: Optional[float] = None) -> List[DayWindow]:
    out: List[DayWindow] = []
    for trace in traces:
        for w in window_daily(trace, window_len, max_gap):
            out.append(daylight_filter(w, daylight_threshold) if daylight_threshold is not None else w)
    return out
