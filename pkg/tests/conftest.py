import numpy as np
import pytest

from hadamardlab.spaces import BallModel, WarpedSurface, constant_profile


@pytest.fixture(scope="session")
def ball2():
    return BallModel(2, 1.0)


@pytest.fixture(scope="session")
def ball3():
    return BallModel(3, 1.0)


@pytest.fixture(scope="session")
def h2_surface():
    """Constant-curvature surface: isometric to ball2, the exactness oracle."""
    return WarpedSurface(constant_profile(1.0), 1.0, 1.0, r_max=80.0, name="h2")


@pytest.fixture(scope="session")
def warped():
    """Default variable-curvature surface with pinching [-4, -1]."""
    return WarpedSurface.default(1.0, 2.0)


def ball_point(rho, angle):
    return np.tanh(0.5 * rho) * np.array([np.cos(angle), np.sin(angle)])
