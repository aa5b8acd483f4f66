from typing import Dict, Sequence

import numpy as np
from scipy import stats as sps

from src.config import STAT_NAMES
from src.errors import StructureError

# relative spread below which a band counts as constant
_FLAT_RTOL = 1e-12


def zero_crossings(c: np.ndarray) -> int:
    """Sign changes between consecutive nonzero coefficients."""
    s = np.sign(c[c != 0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def shannon_entropy(c: np.ndarray) -> float:
    """Entropy (nats) of the energy distribution c_i^2 / sum c^2; 0 for a zero-energy band."""
    energy = c * c
    if not energy.any():
        return 0.0
    return float(sps.entropy(energy))


def band_stats(coeffs: Sequence[float]) -> Dict[str, float]:
    """
    The 11 per-band statistics, population (1/n) moments throughout.
    Skewness and excess kurtosis are 0 for a constant band.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        raise StructureError("band_stats needs at least one coefficient")

    mean = float(np.mean(c))
    std = float(np.std(c))
    flat = std <= _FLAT_RTOL * max(float(np.max(np.abs(c))), np.finfo(float).tiny)
    return {
        "mean": mean,
        "std": 0.0 if flat else std,
        "rms": float(np.sqrt(np.mean(c * c))),
        "skewness": 0.0 if flat else float(sps.skew(c, bias=True)),
        "kurtosis": 0.0 if flat else float(sps.kurtosis(c, fisher=True, bias=True)),
        "min": float(np.min(c)),
        "max": float(np.max(c)),
        "median": float(np.median(c)),
        "energy": float(np.dot(c, c)),
        "entropy": shannon_entropy(c),
        "zero_crossings": float(zero_crossings(c)),
    }


def select(values: Dict[str, float], names: Sequence[str] = STAT_NAMES) -> list:
    return [values[n] for n in names]
