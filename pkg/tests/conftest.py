import numpy as np
import pytest

import zkstrip as zk


@pytest.fixture(scope="session")
def grid2d_small():
    return zk.build_grid(np.pi / 2, 2, 32, 16, half_width=6.0)


@pytest.fixture(scope="session")
def grid2d_medium():
    return zk.build_grid(np.pi / 2, 2, 64, 32, half_width=6.0)


@pytest.fixture(scope="session")
def grid2d_wide():
    # wide box for slow-structure custom tables (half_width >= 6x scale)
    return zk.build_grid(np.pi / 2, 2, 64, 64, half_width=12.0)


@pytest.fixture(scope="session")
def grid3d_small():
    return zk.build_grid(1.0, 3, 12, 8, 8, half_width=4.0)


@pytest.fixture(scope="session")
def ops2d_small(grid2d_small):
    return zk.build_operators(grid2d_small, dealias=False)


@pytest.fixture(scope="session")
def ops2d_medium(grid2d_medium):
    return zk.build_operators(grid2d_medium)


@pytest.fixture(scope="session")
def ops3d_small(grid3d_small):
    return zk.build_operators(grid3d_small, dealias=False)
