import numpy as np
import pytest

from nnctseg import MarkedPattern, StudyRegion


def random_pattern(rng, sizes, region=None):
    """Uniform pattern on the unit square with the given class sizes."""
    n = int(sum(sizes))
    pts = rng.random((n, 2))
    labels = np.repeat(np.arange(len(sizes)), sizes)
    classes = tuple(f"c{k + 1}" for k in range(len(sizes)))
    return MarkedPattern(pts, labels, classes, region or StudyRegion.unit())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
