import numpy as np
import pytest

from pnas3d import make_plane, make_sphere_cap


@pytest.fixture(scope="session")
def plane_cloud():
    return make_plane(100, 100)


@pytest.fixture(scope="session")
def sphere_cap_cloud():
    return make_sphere_cap(5000, cap_deg=40.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
