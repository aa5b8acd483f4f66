# src/wavelets/dwt.py
"""
Mallat pyramid: repeated filter-and-downsample of the approximation band.

Two boundary modes:
- symmetric: half-sample symmetric extension; a band computed from n samples
  has floor((n + L - 1) / 2) = ceil(n / 2) + L/2 - 1 coefficients. Matches
  PyWavelets' 'symmetric' mode coefficient for coefficient.
- periodic: circular filtering of an even-length input (odd inputs gain one
  trailing zero, which the inverse trims); a band has ceil(n / 2) coefficients
  and the transform is orthogonal, so energy is preserved at every length.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from src.config import BOUNDARY
from src.errors import StructureError
from src.wavelets.filters import WaveletSpec, get_wavelet

MODES = ("symmetric", "periodic")


@dataclass(frozen=True)
class WaveletDecomposition:
    wavelet: str
    levels: int
    approx: np.ndarray
    details: Tuple[np.ndarray, ...]     # details[0] is level 1 (finest)
    original_len: int
    mode: str = "symmetric"

    def band_names(self) -> List[str]:
        return band_names(self.levels)

    def bands(self) -> Iterator[Tuple[str, np.ndarray]]:
        """Bands coarse to fine: a_J, d_J, ..., d_1."""
        yield f"a{self.levels}", self.approx
        for j in range(self.levels, 0, -1):
            yield f"d{j}", self.details[j - 1]


def band_names(levels: int) -> List[str]:
    return [f"a{levels}"] + [f"d{j}" for j in range(levels, 0, -1)]


def max_levels(n: int, filter_len: int) -> int:
    """floor(log2(n / (filter_len - 1))); Haar (filter_len 2) gives floor(log2 n)."""
    if filter_len < 2:
        raise StructureError(f"filter length must be >= 2, got {filter_len}")
    if n < filter_len:
        raise StructureError(f"signal length {n} is shorter than the filter ({filter_len})")
    return (n // (filter_len - 1)).bit_length() - 1


def band_length(n: int, filter_len: int, mode: str) -> int:
    if mode == "periodic":
        return (n + 1) // 2
    return (n + filter_len - 1) // 2


def coefficient_lengths(n: int, filter_len: int, levels: int, mode: str) -> List[int]:
    """[n_0, n_1, ..., n_J] where n_0 is the input length."""
    lengths = [n]
    for _ in range(levels):
        lengths.append(band_length(lengths[-1], filter_len, mode))
    return lengths


# ---------------------------
# Single-level kernels
# ---------------------------

def _analysis_symmetric(x: np.ndarray, w: WaveletSpec) -> Tuple[np.ndarray, np.ndarray]:
    L = w.filter_len
    ext = np.pad(x, L - 1, mode="symmetric")
    out_len = band_length(len(x), L, "symmetric")
    lo = np.convolve(ext, w.dec_lo)[L:L + 2 * out_len:2]
    hi = np.convolve(ext, w.dec_hi)[L:L + 2 * out_len:2]
    return lo, hi


def _synthesis_symmetric(a: np.ndarray, d: np.ndarray, w: WaveletSpec, out_len: int) -> np.ndarray:
    L = w.filter_len
    up_a = np.zeros(2 * len(a))
    up_d = np.zeros(2 * len(d))
    up_a[::2] = a
    up_d[::2] = d
    y = np.convolve(up_a, w.rec_lo) + np.convolve(up_d, w.rec_hi)
    return y[L - 2:L - 2 + out_len]


def _periodic_index(half: int, L: int, n: int) -> np.ndarray:
    return (2 * np.arange(half)[:, None] + np.arange(L)[None, :]) % n


def _analysis_periodic(x: np.ndarray, w: WaveletSpec) -> Tuple[np.ndarray, np.ndarray]:
    if len(x) % 2:
        x = np.append(x, 0.0)
    idx = _periodic_index(len(x) // 2, w.filter_len, len(x))
    taps = x[idx]
    return taps @ w.rec_lo, taps @ w.rec_hi


def _synthesis_periodic(a: np.ndarray, d: np.ndarray, w: WaveletSpec, out_len: int) -> np.ndarray:
    n = 2 * len(a)
    idx = _periodic_index(len(a), w.filter_len, n)
    y = np.zeros(n)
    np.add.at(y, idx, a[:, None] * w.rec_lo[None, :] + d[:, None] * w.rec_hi[None, :])
    return y[:out_len]


# ---------------------------
# Public API
# ---------------------------

def dwt_forward(signal: Sequence[float], wavelet: Union[str, WaveletSpec], levels: int,
                mode: str = BOUNDARY) -> WaveletDecomposition:
    w = get_wavelet(wavelet)
    if mode not in MODES:
        raise StructureError(f"unknown boundary mode {mode!r}; choose one of {MODES}")
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise StructureError("signal must be one-dimensional")
    limit = max_levels(len(x), w.filter_len)
    if not 1 <= levels <= limit:
        raise StructureError(
            f"{levels} levels requested; a length-{len(x)} signal with {w.name} allows at most {limit}")

    step = _analysis_periodic if mode == "periodic" else _analysis_symmetric
    approx = x
    details: List[np.ndarray] = []
    for _ in range(levels):
        approx, detail = step(approx, w)
        details.append(detail)
    return WaveletDecomposition(w.name, levels, approx, tuple(details), len(x), mode)


def dwt_inverse(decomp: WaveletDecomposition) -> np.ndarray:
    w = get_wavelet(decomp.wavelet)
    if decomp.mode not in MODES:
        raise StructureError(f"unknown boundary mode {decomp.mode!r}")
    if len(decomp.details) != decomp.levels or decomp.levels < 1:
        raise StructureError(f"expected {decomp.levels} detail bands, found {len(decomp.details)}")
    lengths = coefficient_lengths(decomp.original_len, w.filter_len, decomp.levels, decomp.mode)
    if len(decomp.approx) != lengths[-1]:
        raise StructureError(f"approximation band has {len(decomp.approx)} coefficients, expected {lengths[-1]}")
    for j, band in enumerate(decomp.details, start=1):
        if len(band) != lengths[j]:
            raise StructureError(f"detail band d{j} has {len(band)} coefficients, expected {lengths[j]}")

    step = _synthesis_periodic if decomp.mode == "periodic" else _synthesis_symmetric
    a = np.asarray(decomp.approx, dtype=float)
    for j in range(decomp.levels, 0, -1):
        a = step(a, np.asarray(decomp.details[j - 1], dtype=float), w, lengths[j - 1])
    return a
