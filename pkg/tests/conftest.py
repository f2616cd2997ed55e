import numpy as np
import pytest

from roiform import datagen


@pytest.fixture(scope="session")
def icosphere2():
    return datagen.icosphere(2)


@pytest.fixture(scope="session")
def icosphere3():
    return datagen.icosphere(3)


@pytest.fixture(scope="session")
def ellipsoid():
    # one moderately anisotropic shape shared by query tests
    return datagen.gen_ellipsoid_mesh(10.0, 20.0, 40.0, subdiv=2)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
