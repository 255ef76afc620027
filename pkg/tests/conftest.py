import numpy as np
import pytest

import gprior as gp


@pytest.fixture(scope="session")
def grid201():
    return gp.make_grid(201)


@pytest.fixture(scope="session")
def grid1001():
    return gp.make_grid(1001)


@pytest.fixture(scope="session")
def bm_basis_201(grid201):
    return gp.eig_basis(gp.BrownianMotion(), grid201, 1e-10)


@pytest.fixture(scope="session")
def bm_basis_1001(grid1001):
    return gp.eig_basis(gp.BrownianMotion(), grid1001, 1e-10)


@pytest.fixture(scope="session")
def bm_basis_2001():
    return gp.eig_basis(gp.BrownianMotion(), gp.make_grid(2001), 1e-10)


@pytest.fixture(scope="session")
def rl1_basis_1001(grid1001):
    return gp.eig_basis(gp.RiemannLiouville(alpha=1.0), grid1001, 1e-10)


@pytest.fixture(scope="session")
def scalar_basis():
    """Single unit eigenvalue with a constant eigenfunction: the paths
    are scalar standard normals."""
    g = gp.make_grid(51)
    kern = gp.SeriesKernel(g, np.array([1.0]), np.ones((1, 51)))
    return gp.eig_basis(kern, g, 1e-10)


@pytest.fixture(scope="session")
def toy2d_basis():
    """Two-mode basis on a coarse grid for brute-force optimizer checks."""
    g = gp.make_grid(21)
    phi = np.vstack([np.ones(21), np.sqrt(3.0) * (2.0 * g.points - 1.0)])
    kern = gp.SeriesKernel(g, np.array([2.0, 0.5]), phi)
    return gp.eig_basis(kern, g, 1e-12)
