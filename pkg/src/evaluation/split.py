import math
from typing import Tuple

import numpy as np

from src.config import SEED, TEST_FRACTION
from src.errors import DataError
from src.features.matrix import FeatureMatrix
from src.utils.seeding import SPLIT, derive_rng


def holdout_count(class_count: int, test_fraction: float) -> int:
    """ceil(count * fraction), at least 1 and leaving at least one training row."""
    n = math.ceil(round(class_count * test_fraction, 9))
    return min(max(n, 1), class_count - 1)


def split_stratified(matrix: FeatureMatrix, test_fraction: float = TEST_FRACTION,
                     seed: int = SEED) -> Tuple[FeatureMatrix, FeatureMatrix]:
    """Per-class seeded shuffle; rows keep their original relative order on each side."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    y = matrix.require_labels()
    test_rows = []
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        if len(members) < 2:
            raise DataError(f"class {cls} has {len(members)} samples; stratified split needs at least 2")
        picked = derive_rng(seed, SPLIT, cls).permutation(members)
        test_rows.append(picked[: holdout_count(len(members), test_fraction)])
    is_test = np.zeros(matrix.n_samples, dtype=bool)
    is_test[np.concatenate(test_rows)] = True
    return matrix.take(np.flatnonzero(~is_test)), matrix.take(np.flatnonzero(is_test))
