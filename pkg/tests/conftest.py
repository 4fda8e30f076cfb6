import numpy as np
import pytest

from gallery import fermat_cubic, swinnerton_dyer_surface
from gf import field_of_order
from mpoly import parse_poly
from projvar import Hypersurface
from store import RecordStore


@pytest.fixture
def gf2():
    return field_of_order(2)


@pytest.fixture
def gf4():
    return field_of_order(4)


@pytest.fixture
def gf8():
    return field_of_order(8)


@pytest.fixture
def gf7():
    return field_of_order(7)


@pytest.fixture
def gf9():
    return field_of_order(9)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def sd():
    """The Swinnerton-Dyer surface over GF(2)."""
    return swinnerton_dyer_surface()


@pytest.fixture(scope="session")
def fermat4():
    return fermat_cubic(2, 4)


@pytest.fixture(scope="session")
def cyclic9():
    """A smooth cubic surface over GF(9) carrying the lines x0 = x2 = 0 and x1 = x3 = 0."""
    return Hypersurface(parse_poly("x0^2*x1 + x1^2*x2 + x2^2*x3 + x3^2*x0", field_of_order(9)))


@pytest.fixture
def store(tmp_path):
    return RecordStore(str(tmp_path / "store"))
