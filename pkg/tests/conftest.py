import os

import hypothesis
import numpy as np
import pytest

from src.synth.generator import SynthConfig

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20230601)


@pytest.fixture
def small_synth():
    """Short days so the whole pipeline runs in well under a second."""
    return SynthConfig(days_per_class=12, day_len=256, sunrise=40, sunset=216,
                       snail_attenuation=0.80, panels_per_class=4, seed=7)


@pytest.fixture
def blobs(rng):
    """Two well separated Gaussian clouds, 30 rows each, 4 features."""
    X0 = rng.normal(0.0, 1.0, (30, 4))
    X1 = rng.normal(6.0, 1.0, (30, 4))
    X = np.vstack([X0, X1])
    y = np.array([0] * 30 + [1] * 30)
    ids = [f"s{i:03d}" for i in range(60)]
    return X, y, ids
