"""
Orthonormal wavelet filter banks.

`lowpass` is the scaling filter h in its usual published order; the analysis
step correlates the signal with h and with its quadrature mirror
g[k] = (-1)^k h[L-1-k]. Synthesis uses the same pair (see src.wavelets.dwt).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from src.errors import ConfigError

_SQRT2 = math.sqrt(2.0)
_SQRT3 = math.sqrt(3.0)

_HAAR = (1.0 / _SQRT2, 1.0 / _SQRT2)

_DB2 = (
    (1.0 + _SQRT3) / (4.0 * _SQRT2),
    (3.0 + _SQRT3) / (4.0 * _SQRT2),
    (3.0 - _SQRT3) / (4.0 * _SQRT2),
    (1.0 - _SQRT3) / (4.0 * _SQRT2),
)

# Daubechies, 4 vanishing moments
_DB4 = (
    0.23037781330885523,
    0.7148465705525415,
    0.6308807679295904,
    -0.02798376941698385,
    -0.18703481171888114,
    0.030841381835986965,
    0.032883011666982945,
    -0.010597401784997278,
)


def quadrature_mirror(lowpass: Tuple[float, ...]) -> Tuple[float, ...]:
    n = len(lowpass)
    return tuple(((-1.0) ** k) * lowpass[n - 1 - k] for k in range(n))


@dataclass(frozen=True)
class WaveletSpec:
    name: str
    lowpass: Tuple[float, ...]

    @property
    def highpass(self) -> Tuple[float, ...]:
        return quadrature_mirror(self.lowpass)

    @property
    def filter_len(self) -> int:
        return len(self.lowpass)

    # analysis filters in convolution order
    @property
    def dec_lo(self) -> np.ndarray:
        return np.asarray(self.lowpass[::-1])

    @property
    def dec_hi(self) -> np.ndarray:
        return np.asarray(self.highpass[::-1])

    # synthesis filters in convolution order
    @property
    def rec_lo(self) -> np.ndarray:
        return np.asarray(self.lowpass)

    @property
    def rec_hi(self) -> np.ndarray:
        return np.asarray(self.highpass)


WAVELETS: Dict[str, WaveletSpec] = {
    "haar": WaveletSpec("haar", _HAAR),
    "db2": WaveletSpec("db2", _DB2),
    "db4": WaveletSpec("db4", _DB4),
}


def get_wavelet(name_or_spec) -> WaveletSpec:
    if isinstance(name_or_spec, WaveletSpec):
        return name_or_spec
    key = str(name_or_spec).strip().lower()
    if key not in WAVELETS:
        raise ConfigError(f"unknown wavelet {name_or_spec!r}; choose one of {sorted(WAVELETS)}")
    return WAVELETS[key]
