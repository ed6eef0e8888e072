import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dgcat.algebra import dual_numbers, trivial_algebra
from dgcat.field import QQ
from dgcat.zoo import tian_quotient, zigzag_ambient


@pytest.fixture(scope="session")
def kfield():
    return QQ


@pytest.fixture(scope="session")
def kalg():
    return trivial_algebra(QQ, "k")


@pytest.fixture(scope="session")
def D():
    """The acyclic dual numbers k[x]/(x^2), |x| = -1, d(x) = 1."""
    return dual_numbers(QQ, degree=-1, differential=True, name="D")


@pytest.fixture(scope="session")
def dualnum():
    """Dual numbers with trivial grading and zero differential."""
    return dual_numbers(QQ, degree=0, name="dual")


@pytest.fixture(scope="session")
def amb2():
    return zigzag_ambient(2)


@pytest.fixture(scope="session")
def amb3():
    return zigzag_ambient(3)


@pytest.fixture(scope="session")
def tian():
    return tian_quotient(QQ)
