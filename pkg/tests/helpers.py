import datetime as dt

import numpy as np

from src.ingest.telemetry import CurrentTrace
from src.ingest.windowing import DayWindow


def make_trace(minutes, currents, day="2023-06-01", panel_id="pv-h01", label=0) -> CurrentTrace:
    base = np.datetime64(f"{day}T00:00:00", "s")
    stamps = base + np.asarray(minutes, dtype=np.int64) * np.timedelta64(60, "s")
    return CurrentTrace(panel_id, stamps, np.asarray(currents, dtype=float), label)


def make_window(values, panel_id="pv-h01", date="2023-06-01", label=0) -> DayWindow:
    return DayWindow(panel_id, dt.date.fromisoformat(date), np.asarray(values, dtype=float), label)
