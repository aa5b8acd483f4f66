import io
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from src.errors import ConfigError
from src.ingest.telemetry import parse_trace_csv
from src.ingest.windowing import window_daily
from src.synth.generator import SynthConfig, cloud_noise, emit_csv, generate, with_preset

GOLDEN = Path(__file__).parent / "golden" / "synth_two_days.csv"

# one lit minute at mid-bell, so every value is exact in binary
TINY = SynthConfig(days_per_class=2, i_max=6.5, day_len=8, sunrise=2, sunset=4, bell_exponent=1.0,
                   cloud_noise_sigma=0.0, snail_extra_noise_sigma=0.0, peak_jitter=0.0,
                   snail_attenuation=0.75, snail_dropout_rate=0.0, panels_per_class=1, seed=7)


def _csv(windows) -> bytes:
    buf = io.StringIO()
    emit_csv(windows, buf)
    return buf.getvalue().encode()


def test_two_day_fixture_matches_the_golden_file():
    assert _csv(generate(TINY)) == GOLDEN.read_bytes()


def test_same_seed_same_bytes(small_synth):
    assert _csv(generate(small_synth)) == _csv(generate(small_synth))
    assert _csv(generate(replace(small_synth, seed=8))) != _csv(generate(small_synth))


def test_classes_coincide_without_a_snail_signature():
    cfg = SynthConfig(days_per_class=6, cloud_noise_sigma=0.0, snail_extra_noise_sigma=0.0,
                      snail_attenuation=1.0, snail_dropout_rate=0.0)
    windows = generate(cfg)
    healthy, snail = windows[:6], windows[6:]
    for h, s in zip(healthy, snail):
        assert (h.label, s.label) == (0, 1)
        np.testing.assert_array_equal(h.values, s.values)


def test_noiseless_midday_peak_is_i_max():
    cfg = SynthConfig(days_per_class=1, cloud_noise_sigma=0.0, peak_jitter=0.0)
    healthy = generate(cfg)[0]
    assert healthy.values[(cfg.sunrise + cfg.sunset) // 2] == cfg.i_max


def test_currents_stay_within_bounds_and_dark_at_night():
    cfg = SynthConfig(days_per_class=20, seed=3)
    for w in generate(cfg):
        assert len(w) == cfg.day_len
        assert np.all(w.values >= 0.0)
        assert np.all(w.values <= cfg.i_max * (1 + 5 * (cfg.cloud_noise_sigma + cfg.snail_extra_noise_sigma)))
        assert np.all(w.values[: cfg.sunrise + 1] == 0.0)
        assert np.all(w.values[cfg.sunset:] == 0.0)


def test_default_classes_stay_close():
    windows = generate(SynthConfig(days_per_class=10, seed=9))
    healthy = np.mean([w.values.sum() for w in windows[:10]])
    snail = np.mean([w.values.sum() for w in windows[10:]])
    assert 0.85 < snail / healthy < 1.0


def test_unexpressed_snail_days_are_attenuated_healthy_days():
    cfg = SynthConfig(days_per_class=400, day_len=128, sunrise=20, sunset=108, snail_expression_rate=0.6, seed=4)
    windows = generate(cfg)
    healthy, snail = windows[:400], windows[400:]
    quiet = [np.array_equal(s.values, h.values * cfg.snail_attenuation) for h, s in zip(healthy, snail)]
    assert 0.32 < np.mean(quiet) < 0.48


@pytest.mark.parametrize("rate, quiet_days", [(0.0, 30), (1.0, 0)])
def test_expression_rate_extremes(rate, quiet_days):
    cfg = SynthConfig(days_per_class=30, day_len=128, sunrise=20, sunset=108, snail_expression_rate=rate, seed=4)
    windows = generate(cfg)
    quiet = sum(np.array_equal(s.values, h.values * cfg.snail_attenuation)
                for h, s in zip(windows[:30], windows[30:]))
    assert quiet == quiet_days


def test_panel_and_date_assignment():
    windows = generate(SynthConfig(days_per_class=8, day_len=64, sunrise=10, sunset=50, seed=1))
    assert [w.sample_id for w in windows[:5]] == [
        "pv-h01@2023-06-01", "pv-h02@2023-06-01", "pv-h03@2023-06-01", "pv-h04@2023-06-01",
        "pv-h01@2023-06-02",
    ]
    assert windows[8].sample_id == "pv-s01@2023-06-01"
    assert len({w.sample_id for w in windows}) == 16


def test_cloud_noise_sigma_is_measured_after_smoothing():
    cfg = SynthConfig(day_len=200_000, sunrise=1, sunset=199_999, cloud_noise_sigma=0.15)
    noise = cloud_noise(cfg, np.random.default_rng(0))
    assert noise.std() == pytest.approx(0.15, rel=0.05)
    assert abs(np.corrcoef(noise[:-1], noise[1:])[0, 1]) > 0.8


def test_emitted_csv_parses_back_to_the_same_windows(small_synth):
    windows = generate(small_synth)
    traces = parse_trace_csv(_csv(windows))
    back = {w.sample_id: w for t in traces for w in window_daily(t, small_synth.day_len, 0)}
    assert len(back) == len(windows)
    for w in windows:
        got = back[w.sample_id]
        assert got.label == w.label
        np.testing.assert_array_equal(got.values, w.values)


def test_no_days_gives_a_header_only_file():
    assert _csv(generate(replace(TINY, days_per_class=0))) == b"panel_id,timestamp,current_a,label\n"


def test_presets():
    base = SynthConfig()
    assert with_preset(base, "easy").snail_attenuation == 0.80
    assert with_preset(base, "paper") == base
    assert with_preset(base, "hard").snail_attenuation == 0.98
    with pytest.raises(ConfigError):
        with_preset(base, "medium")


@pytest.mark.parametrize("bad", [
    {"sunrise": 1300},
    {"cloud_noise_sigma": -0.1},
    {"snail_attenuation": 0.0},
    {"snail_attenuation": 1.2},
    {"panels_per_class": 0},
    {"snail_expression_rate": 1.5},
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        SynthConfig(**bad)
