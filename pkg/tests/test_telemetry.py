import io

import numpy as np
import pytest

from src.errors import DataError
from src.ingest.telemetry import parse_trace_csv, write_windows_csv
from src.ingest.windowing import window_daily
from tests.helpers import make_window

HEADER = b"panel_id,timestamp,current_a,label\n"

TWO_PANELS = HEADER + b"""pv-s01,2023-06-01T00:01:00,2.0,1
pv-h01,2023-06-01T00:00:00,1.0,0
pv-h01,2023-06-01T00:02:00,1.5,0
pv-s01,2023-06-01T00:00:00,1.0,1
pv-h01,2023-06-01T00:01:00,1.25,0
pv-s01,2023-06-01T00:02:00,2.5,1
"""


def test_header_only_gives_no_traces():
    assert parse_trace_csv(HEADER) == []


def test_rows_grouped_per_panel_and_sorted():
    traces = parse_trace_csv(TWO_PANELS)
    assert [t.panel_id for t in traces] == ["pv-h01", "pv-s01"]
    assert [len(t) for t in traces] == [3, 3]
    np.testing.assert_array_equal(traces[0].currents, [1.0, 1.25, 1.5])
    np.testing.assert_array_equal(traces[1].currents, [1.0, 2.0, 2.5])
    assert traces[0].label == 0 and traces[1].label == 1
    assert np.all(np.diff(traces[1].timestamps) == np.timedelta64(60, "s"))


def test_label_column_is_optional():
    raw = b"panel_id,timestamp,current_a\npv-x,2023-06-01T07:30:00,3.2\n"
    (trace,) = parse_trace_csv(raw)
    assert trace.label is None
    assert trace.timestamps[0] == np.datetime64("2023-06-01T07:30:00")


def test_accepts_text_streams():
    traces = parse_trace_csv(io.StringIO(TWO_PANELS.decode()))
    assert len(traces) == 2


def test_duplicate_row_names_its_line():
    raw = HEADER + b"""pv-h01,2023-06-01T00:00:00,1.0,0
pv-h01,2023-06-01T00:01:00,1.0,0
pv-h01,2023-06-01T00:00:00,1.0,0
"""
    with pytest.raises(DataError, match="line 4: duplicate"):
        parse_trace_csv(raw)


def test_malformed_current_names_its_line():
    raw = HEADER + b"pv-h01,2023-06-01T00:00:00,1.0,0\npv-h01,2023-06-01T00:01:00,abc,0\n"
    with pytest.raises(DataError, match="line 3") as info:
        parse_trace_csv(raw)
    assert info.value.line == 3


def test_unparsable_timestamp():
    raw = HEADER + b"pv-h01,yesterday,1.0,0\n"
    with pytest.raises(DataError, match="line 2: unparsable timestamp"):
        parse_trace_csv(raw)


def test_small_negative_currents_are_clamped():
    raw = HEADER + b"pv-h01,2023-06-01T00:00:00,-0.05,0\npv-h01,2023-06-01T00:01:00,0.5,0\n"
    (trace,) = parse_trace_csv(raw)
    np.testing.assert_array_equal(trace.currents, [0.0, 0.5])
    assert not np.signbit(trace.currents[0])


def test_negative_current_beyond_tolerance():
    raw = HEADER + b"pv-h01,2023-06-01T00:00:00,-0.5,0\n"
    with pytest.raises(DataError, match="line 2: negative current"):
        parse_trace_csv(raw)


def test_bad_label():
    raw = HEADER + b"pv-h01,2023-06-01T00:00:00,1.0,2\n"
    with pytest.raises(DataError, match="label must be 0, 1 or empty"):
        parse_trace_csv(raw)


def test_conflicting_labels_within_a_panel():
    raw = HEADER + b"pv-h01,2023-06-01T00:00:00,1.0,0\npv-h01,2023-06-01T00:01:00,1.0,1\n"
    with pytest.raises(DataError, match="conflicting labels"):
        parse_trace_csv(raw)


def test_missing_column_is_reported_on_the_header_line():
    with pytest.raises(DataError, match="line 1: missing columns"):
        parse_trace_csv(b"panel_id,timestamp\npv-h01,2023-06-01T00:00:00\n")


def test_missing_file_names_the_path(tmp_path):
    path = tmp_path / "nope.csv"
    with pytest.raises(DataError, match="nope.csv"):
        parse_trace_csv(str(path))


def test_windows_survive_a_csv_round_trip(rng):
    values = rng.uniform(0.0, 9.0, 30)
    values[3] = 1.0 / 3.0
    values[4] = 0.1 + 0.2
    buf = io.StringIO()
    write_windows_csv([make_window(values, label=1)], buf)
    (trace,) = parse_trace_csv(buf.getvalue().encode())
    (window,) = window_daily(trace, window_len=30, max_gap=0)
    assert window.label == 1
    assert window.sample_id == "pv-h01@2023-06-01"
    np.testing.assert_array_equal(window.values, values)


def test_write_empty_list_gives_header_only():
    buf = io.StringIO()
    write_windows_csv([], buf)
    assert buf.getvalue() == "panel_id,timestamp,current_a,label\n"


def test_unlabeled_windows_write_an_empty_label():
    buf = io.StringIO()
    write_windows_csv([make_window([1.0, 2.0], label=None)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[1] == "pv-h01,2023-06-01T00:00:00,1,"
