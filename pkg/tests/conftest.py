import numpy as np
import pytest

from voxsteer.bc import preset_cantilever
from voxsteer.mesh import DomainSpec, build_mesh


@pytest.fixture
def mesh422():
    return build_mesh(DomainSpec(2.0, 1.0, 1.0), 0.5)


@pytest.fixture
def mesh844():
    return build_mesh(DomainSpec(2.0, 1.0, 1.0), 0.25)


@pytest.fixture
def cantilever_bcs():
    return preset_cantilever()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
