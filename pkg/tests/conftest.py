import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "det",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("det")


def random_bits(seed, shape, p=0.5):
    rng = np.random.default_rng(seed)
    return rng.random(shape) < p


def random_gray(seed, shape, levels=None):
    rng = np.random.default_rng(seed)
    if levels is None:
        return rng.random(shape, dtype=np.float32)
    vals = rng.integers(0, levels, size=shape)
    return (vals / (levels - 1)).astype(np.float32)


@pytest.fixture
def data_dir():
    import pathlib

    return pathlib.Path(__file__).parent / "data"
