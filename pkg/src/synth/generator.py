# src/synth/generator.py
"""
Synthetic daily current curves for healthy and snail-trail panels.

A healthy day is a sine bell between sunrise and sunset, scaled by the day's
peak and perturbed by low-pass cloud noise. The snail-trail sample of the
same day shares that weather and is always mildly attenuated. On a fraction
`snail_expression_rate` of days it also carries extra high-frequency noise
and short dips; on the other days it is an attenuated healthy curve, which
is what keeps some snail-trail days hard to tell from healthy ones.
"""
from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, List, Tuple

import numpy as np

from src.config import SEED
from src.errors import ConfigError
from src.ingest.telemetry import write_windows_csv
from src.ingest.windowing import DayWindow
from src.utils.seeding import SNAIL, WEATHER, derive_rng

logger = logging.getLogger(__name__)

DIP_MINUTES = (3, 10)
DIP_DEPTH = (0.10, 0.30)


@dataclass(frozen=True)
class SynthConfig:
    days_per_class: int = 200
    i_max: float = 8.0
    day_len: int = 1440
    sunrise: int = 360
    sunset: int = 1200
    bell_exponent: float = 1.2
    cloud_noise_sigma: float = 0.15
    cloud_smoothing: int = 15
    peak_jitter: float = 0.10
    snail_attenuation: float = 0.94
    snail_extra_noise_sigma: float = 0.08
    snail_dropout_rate: float = 2.0
    snail_expression_rate: float = 0.6     # share of snail days showing noise and dips
    panels_per_class: int = 4
    start_date: str = "2023-06-01"
    seed: int = SEED

    def __post_init__(self):
        if not 0 < self.sunrise < self.sunset < self.day_len:
            raise ConfigError("need 0 < sunrise < sunset < day_len")
        if min(self.cloud_noise_sigma, self.snail_extra_noise_sigma) < 0:
            raise ConfigError("noise sigmas must be >= 0")
        if not 0.0 < self.snail_attenuation <= 1.0:
            raise ConfigError("snail_attenuation must be in (0, 1]")
        if self.snail_dropout_rate < 0:
            raise ConfigError("snail_dropout_rate must be >= 0")
        if not 0.0 <= self.snail_expression_rate <= 1.0:
            raise ConfigError("snail_expression_rate must be in [0, 1]")
        if not 0.0 <= self.peak_jitter < 1.0:
            raise ConfigError("peak_jitter must be in [0, 1)")
        if self.days_per_class < 0 or self.panels_per_class < 1 or self.cloud_smoothing < 1:
            raise ConfigError("days_per_class >= 0, panels_per_class >= 1 and cloud_smoothing >= 1 required")
        if self.i_max <= 0:
            raise ConfigError("i_max must be positive")
        dt.date.fromisoformat(self.start_date)

    @property
    def ceiling(self) -> float:
        return self.i_max * (1.0 + 5.0 * (self.cloud_noise_sigma + self.snail_extra_noise_sigma))

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]


PRESETS: Dict[str, Dict[str, Any]] = {
    "easy": {"snail_attenuation": 0.80},
    "paper": {},
    "hard": {"snail_attenuation": 0.98},
}


def with_preset(config: SynthConfig, overlap: str) -> SynthConfig:
    if overlap not in PRESETS:
        raise ConfigError(f"unknown overlap preset {overlap!r}; choose one of {sorted(PRESETS)}")
    return replace(config, **PRESETS[overlap])


# ---------------------------
# Curve pieces
# ---------------------------

def daylight_mask(cfg: SynthConfig) -> np.ndarray:
    t = np.arange(cfg.day_len)
    return (t > cfg.sunrise) & (t < cfg.sunset)


def bell(cfg: SynthConfig) -> np.ndarray:
    """Unit-peak clear-sky shape, exactly zero outside (sunrise, sunset)."""
    t = np.arange(cfg.day_len, dtype=float)
    lit = daylight_mask(cfg)
    out = np.zeros(cfg.day_len)
    phase = (t[lit] - cfg.sunrise) / (cfg.sunset - cfg.sunrise)
    out[lit] = np.power(np.maximum(0.0, np.sin(np.pi * phase)), cfg.bell_exponent)
    return out


def cloud_noise(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Moving-average-smoothed Gaussian noise whose std is cloud_noise_sigma."""
    if cfg.cloud_noise_sigma == 0:
        return np.zeros(cfg.day_len)
    w = cfg.cloud_smoothing
    white = rng.standard_normal(cfg.day_len + w - 1)
    smooth = np.convolve(white, np.ones(w) / w, mode="valid")
    return smooth * np.sqrt(w) * cfg.cloud_noise_sigma


def _finish(values: np.ndarray, cfg: SynthConfig) -> np.ndarray:
    # +0.0 turns -0.0 into 0.0
    return np.clip(values, 0.0, cfg.ceiling) + 0.0


def _weather(cfg: SynthConfig, day: int, shape: np.ndarray, lit: np.ndarray) -> np.ndarray:
    rng = derive_rng(cfg.seed, day, WEATHER)
    peak = cfg.i_max * (1.0 - cfg.peak_jitter * rng.random())
    return peak * shape + np.where(lit, cloud_noise(cfg, rng), 0.0)


def _snail(cfg: SynthConfig, day: int, healthy: np.ndarray, lit: np.ndarray) -> np.ndarray:
    rng = derive_rng(cfg.seed, day, SNAIL)
    out = healthy * cfg.snail_attenuation
    if rng.random() >= cfg.snail_expression_rate:
        return out
    if cfg.snail_extra_noise_sigma > 0:
        out[lit] += rng.normal(0.0, cfg.snail_extra_noise_sigma, int(lit.sum()))
    n_dips = int(rng.poisson(cfg.snail_dropout_rate)) if cfg.snail_dropout_rate > 0 else 0
    for _ in range(n_dips):
        start = int(rng.integers(cfg.sunrise + 1, cfg.sunset))
        length = int(rng.integers(DIP_MINUTES[0], DIP_MINUTES[1] + 1))
        depth = rng.uniform(*DIP_DEPTH)
        out[start:min(start + length, cfg.sunset)] *= 1.0 - depth
    return out


def _sample_slot(cfg: SynthConfig, day: int, cls: int) -> Tuple[str, dt.date]:
    p = day % cfg.panels_per_class + 1
    prefix = "pv-s" if cls else "pv-h"
    date = dt.date.fromisoformat(cfg.start_date) + dt.timedelta(days=day // cfg.panels_per_class)
    return f"{prefix}{p:02d}", date


# ---------------------------
# Public API
# ---------------------------

def generate(config: SynthConfig) -> List[DayWindow]:
    """All healthy windows (label 0) followed by all snail-trail windows (label 1)."""
    shape = bell(config)
    lit = daylight_mask(config)
    healthy: List[DayWindow] = []
    snail: List[DayWindow] = []
    for day in range(config.days_per_class):
        base = _finish(_weather(config, day, shape, lit), config)
        for cls, values, bucket in ((0, base, healthy),
                                    (1, _finish(_snail(config, day, base, lit), config), snail)):
            panel_id, date = _sample_slot(config, day, cls)
            bucket.append(DayWindow(panel_id=panel_id, date=date, values=values, label=cls))
    logger.info("generated %d healthy and %d snail-trail days", len(healthy), len(snail))
    return healthy + snail


def emit_csv(windows: List[DayWindow], path) -> None:
    write_windows_csv(windows, path)
