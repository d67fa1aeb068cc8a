import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("locspike", deadline=None, max_examples=60)
settings.load_profile("locspike")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_spikes(rng, shape, density=0.2):
    return (rng.random(shape) < density).astype(np.uint8)
