import numpy as np
import pytest

from lfmhd.grid import Grid, GridSpec
from lfmhd.state import EquationOfState


@pytest.fixture(scope="session")
def grid16():
    return Grid(GridSpec(16, 16, 16))


@pytest.fixture(scope="session")
def grid_small():
    # cheapest legal lattice, for the expensive end-to-end paths
    return Grid(GridSpec(8, 8, 8))


@pytest.fixture(scope="session")
def eos():
    return EquationOfState()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
