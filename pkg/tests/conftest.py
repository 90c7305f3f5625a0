import numpy as np
import pytest

from seqembed import sw_score, synth_dataset


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Trigger JIT compilation once so timed tests measure the algorithms.
    sw_score("ATGC", "ATGC")


@pytest.fixture(scope="session")
def small_clustered():
    """3 clusters x 20 sequences of ~80 residues; cheap enough for unit tests."""
    sset, labels = synth_dataset(3, 20, 80, 0.05, rng_seed=9)
    return sset, labels


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
