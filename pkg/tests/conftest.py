import numpy as np
import pytest

from phishsim.corpus import synth_corpus
from phishsim.raster import Raster


@pytest.fixture(scope="session")
def corpus0():
    """The shipped seed-0 corpus; built once for the whole run."""
    return synth_corpus(seed=0)


def random_raster(rng: np.random.Generator, max_side: int = 64) -> Raster:
    """A random RGBA raster with both dimensions in [1, max_side]."""
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    return Raster(rng.integers(0, 256, size=(h, w, 4), dtype=np.uint8))
