import numpy as np
import pytest

from needlets.needlet_frame import build_system
from sphere.spectral import empty_alm


@pytest.fixture(scope="session")
def system2():
    return build_system(2.0, 2)


@pytest.fixture(scope="session")
def system3():
    return build_system(2.0, 3)


@pytest.fixture(scope="session")
def system4():
    return build_system(2.0, 4)


@pytest.fixture(scope="session")
def system5():
    return build_system(2.0, 5)


def make_random_alm(rng: np.random.Generator, lmax: int, lmin: int = 0, pad_to: int | None = None) -> np.ndarray:
    """Coefficients of a random real function with degrees lmin..lmax."""
    alm = empty_alm(pad_to if pad_to is not None else lmax)
    for l in range(lmin, lmax + 1):
        alm[l, 0] = rng.standard_normal()
        alm[l, 1:l + 1] = (rng.standard_normal(l) + 1j * rng.standard_normal(l)) / np.sqrt(2.0)
    return alm


@pytest.fixture
def random_alm():
    return make_random_alm
