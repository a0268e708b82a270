import math

import pytest

from halasz_lab.constants import W0
from halasz_lab.primes import sieve


@pytest.fixture(scope="session")
def small_table():
    return sieve(200_000)


@pytest.fixture(scope="session")
def table_1e6():
    # big enough for Delta(x) at x <= 10^6
    return sieve(int(math.floor(W0 * 10**6)) + 2)


@pytest.fixture(scope="session")
def table_1e7():
    return sieve(int(math.floor(W0 * 10**7)) + 2)
