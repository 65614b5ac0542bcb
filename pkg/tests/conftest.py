import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wapprox.intervals import PrecisionPolicy
from wapprox.model import make_instance


@pytest.fixture(scope="session")
def policy():
    return PrecisionPolicy()


@pytest.fixture(scope="session")
def sqrt23_even():
    """frac(sqrt 2), frac(sqrt 3), equal weights."""
    return make_instance("surd(0,1,2,1)", "surd(0,1,3,1)", F(1, 2), F(1, 2))


@pytest.fixture(scope="session")
def sqrt23_skew():
    """frac(sqrt 2), frac(sqrt 3), weights (2/5, 3/5)."""
    return make_instance("surd(0,1,2,1)", "surd(0,1,3,1)", F(2, 5), F(3, 5))


@pytest.fixture(scope="session")
def series_pair_even():
    """Aligned lacunary pair (bases 2 and 4), equal weights: the strongly
    singular fixture with simultaneous approximation spikes."""
    return make_instance("series(base=2,rule=power3,terms=7)",
                         "series(base=4,rule=power3,terms=7)",
                         F(1, 2), F(1, 2))


@pytest.fixture(scope="session")
def mixed_pair():
    return make_instance("surd(0,1,2,1)", "series(base=2,rule=power3,terms=7)",
                         F(1, 3), F(2, 3))


@pytest.fixture(scope="session")
def traj_sqrt23_even(sqrt23_even):
    from wapprox.trajectory import build_trajectory
    return build_trajectory(sqrt23_even, F(0), F(10))


@pytest.fixture(scope="session")
def traj_sqrt23_skew_5_30(sqrt23_skew):
    from wapprox.trajectory import build_trajectory
    return build_trajectory(sqrt23_skew, F(5), F(30))
