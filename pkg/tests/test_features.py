import io
from dataclasses import replace

import numpy as np
import pytest

from src.errors import DimensionError, PvffError, StructureError
from src.features.matrix import FeatureMatrix, FeatureVector, build_matrix, extract_features, feature_names
from src.synth.generator import generate
from src.wavelets.dwt import dwt_forward
from tests.helpers import make_window


def test_five_levels_give_66_named_features():
    vec = extract_features(dwt_forward(np.random.default_rng(1).normal(size=1440), "db4", 5))
    assert len(vec.names) == len(vec.values) == 66
    assert vec.names[:3] == ("a5_mean", "a5_std", "a5_rms")
    assert vec.names[11] == "d5_mean"
    assert vec.names[-1] == "d1_zero_crossings"
    assert "d3_kurtosis" in vec.names


def test_all_zero_decomposition_gives_zero_features():
    vec = extract_features(dwt_forward(np.zeros(256), "db4", 3))
    np.testing.assert_array_equal(vec.values, np.zeros(44))


def test_extraction_is_deterministic():
    d = dwt_forward(np.random.default_rng(2).normal(size=300), "db2", 4)
    np.testing.assert_array_equal(extract_features(d).values, extract_features(d).values)


def test_empty_band_is_a_structure_error():
    d = dwt_forward(np.ones(64), "haar", 2)
    with pytest.raises(StructureError, match="d1"):
        extract_features(replace(d, details=(np.array([]), d.details[1])))


def test_names_depend_only_on_levels_and_stats():
    assert feature_names(1, ("mean", "std")) == ("a1_mean", "a1_std", "d1_mean", "d1_std")
    assert len(feature_names(5)) == 66


def test_stat_subset_controls_columns():
    d = dwt_forward(np.arange(64.0), "haar", 2)
    vec = extract_features(d, ("energy",))
    assert vec.names == ("a2_energy", "d2_energy", "d1_energy")


def test_feature_vector_rejects_bad_input():
    with pytest.raises(DimensionError):
        FeatureVector(("a", "a"), np.zeros(2))
    with pytest.raises(StructureError):
        FeatureVector(("a",), np.array([np.nan]))


def test_eight_windows_like_the_field_figure(small_synth):
    windows = generate(replace(small_synth, days_per_class=4))
    m = build_matrix(windows, "db4", 5)
    assert m.rows.shape == (8, 66)
    assert m.labels.tolist() == [0, 0, 0, 0, 1, 1, 1, 1]
    assert m.sample_ids[0] == "pv-h01@2023-06-01"
    assert np.all(np.isfinite(m.rows))


def test_row_order_is_independent_of_workers(small_synth):
    windows = generate(small_synth)
    serial = build_matrix(windows, "db4", 5, n_jobs=1)
    parallel = build_matrix(windows, "db4", 5, n_jobs=2)
    np.testing.assert_array_equal(serial.rows, parallel.rows)
    assert serial.sample_ids == parallel.sample_ids


def test_single_and_duplicate_windows():
    w = make_window(np.sin(np.linspace(0, 3, 128)) + 1.0)
    assert build_matrix([w], "haar", 3).rows.shape == (1, 44)
    m = build_matrix([w, w], "haar", 3)
    np.testing.assert_array_equal(m.rows[0], m.rows[1])


def test_dwt_errors_carry_the_sample_id():
    with pytest.raises(StructureError, match="pv-s02@2023-06-05"):
        build_matrix([make_window(np.ones(16), panel_id="pv-s02", date="2023-06-05")], "db4", 5)


def test_empty_sample_list_rejected():
    with pytest.raises(StructureError):
        build_matrix([], "haar", 1)


def test_partial_labels_are_dropped():
    a = make_window(np.arange(32.0), label=0)
    b = make_window(np.arange(32.0), panel_id="pv-x", label=None)
    assert build_matrix([a, b], "haar", 2).labels is None


def test_scaling_a_window_scales_location_features():
    x = np.random.default_rng(3).normal(size=512) + 4.0
    base = build_matrix([make_window(x)], "db4", 4)
    scaled = build_matrix([make_window(2.5 * x)], "db4", 4)
    names = base.feature_names
    for i, name in enumerate(names):
        stat = name.split("_", 1)[1]
        expected = base.rows[0, i]
        if stat in ("mean", "std", "rms", "min", "max", "median"):
            expected *= 2.5
        elif stat == "energy":
            expected *= 6.25
        assert scaled.rows[0, i] == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_matrix_csv_layout():
    m = FeatureMatrix(("a1_mean", "d1_mean"), np.array([[1.5, 0.25]]), ("pv-h01@2023-06-01",), np.array([1]))
    buf = io.StringIO()
    m.to_csv(buf)
    assert buf.getvalue() == "sample_id,label,a1_mean,d1_mean\npv-h01@2023-06-01,1,1.5,0.25\n"


def test_matrix_validation_and_labels():
    with pytest.raises(DimensionError):
        FeatureMatrix(("a",), np.zeros((2, 2)), ("x", "y"))
    with pytest.raises(DimensionError):
        FeatureMatrix(("a",), np.zeros((2, 1)), ("x", "y"), np.array([0]))
    unlabeled = FeatureMatrix(("a",), np.zeros((1, 1)), ("x",))
    with pytest.raises(PvffError, match="no labels"):
        unlabeled.require_labels()


def test_take_keeps_rows_ids_and_labels_together():
    m = FeatureMatrix(("a",), np.array([[0.0], [1.0], [2.0]]), ("x", "y", "z"), np.array([0, 1, 0]))
    sub = m.take([2, 0])
    assert sub.sample_ids == ("z", "x")
    assert sub.rows[:, 0].tolist() == [2.0, 0.0]
    assert sub.labels.tolist() == [0, 0]
