import numpy as np
import pytest

import contractflow as cf


@pytest.fixture(scope="session")
def segment():
    return cf.make_segment([0.0, 0.0], [1.0, 0.0], 200)


@pytest.fixture(scope="session")
def quarter_circle():
    return cf.make_circle_arc(np.pi / 2, 200)


@pytest.fixture(scope="session")
def quarter_circle_400():
    return cf.make_circle_arc(np.pi / 2, 400)


@pytest.fixture(scope="session")
def half_circle():
    return cf.make_circle_arc(np.pi, 200)


@pytest.fixture(scope="session")
def spiral_05():
    return cf.make_log_spiral(0.5, 4 * np.pi, 200)


@pytest.fixture(scope="session")
def spiral_01():
    return cf.make_log_spiral(0.1, 4 * np.pi, 400)
