import numpy as np
import pytest

from hyqgnn.core import CrystalStructure, Lattice, Site
from hyqgnn.featurize import featurize_structures
from hyqgnn.harness.synthetic import generate_structures


def cubic_perovskite(a_el="Sr", b_el="Ti", a=3.905, target=None):
    sites = [
        Site(a_el, (0.0, 0.0, 0.0)),
        Site(b_el, (0.5, 0.5, 0.5)),
        Site("O", (0.5, 0.5, 0.0)),
        Site("O", (0.5, 0.0, 0.5)),
        Site("O", (0.0, 0.5, 0.5)),
    ]
    return CrystalStructure(Lattice.cubic(a), tuple(sites), target)


@pytest.fixture
def srtio3():
    return cubic_perovskite(target=-3.5)


@pytest.fixture(scope="session")
def synthetic_graphs():
    return featurize_structures(generate_structures(60, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
