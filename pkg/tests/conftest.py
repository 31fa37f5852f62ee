import numpy as np
import pytest

from knothe_brenier.cells import Atoms, sample_atoms
from knothe_brenier.geometry import ConvexPolygon, unit_square

FIXTURE_SEED = 0


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def triangle():
    return ConvexPolygon.from_points([(0, 0), (1, 0), (0, 1)])


@pytest.fixture
def hexagon():
    t = np.linspace(0, 2 * np.pi, 7)[:-1] + 0.1
    return ConvexPolygon.from_points(np.c_[0.5 + 0.5 * np.cos(t), 0.5 + 0.45 * np.sin(t)])


@pytest.fixture
def two_symmetric():
    return Atoms([(0.5, 0.25), (0.5, 0.75)])


def five_atoms():
    """The seeded five-point fixture used across the suite."""
    return sample_atoms(unit_square(), 5, np.random.default_rng(FIXTURE_SEED))


@pytest.fixture
def five():
    return five_atoms()


def random_convex_polygon(rng, k=7):
    """Convex hull of points on a jittered ellipse."""
    t = np.sort(rng.uniform(0, 2 * np.pi, k))
    r = rng.uniform(0.3, 1.0, 2)
    c = rng.uniform(-1, 1, 2)
    return ConvexPolygon.from_points(np.c_[c[0] + r[0] * np.cos(t), c[1] + r[1] * np.sin(t)])
