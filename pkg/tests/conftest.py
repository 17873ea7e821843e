import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=50, derandomize=True
)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240)


def random_sequence(rng, width=7, dim=16, signed=False):
    from placealign.model import FeatureSequence

    feats = rng.random((width, dim))
    if signed:
        feats = feats - 0.5
    return FeatureSequence(feats)


def random_trajectory(rng, n=12, width=7, dim=16):
    from placealign.model import Trajectory

    return Trajectory(rng.random((n, width, dim)))
