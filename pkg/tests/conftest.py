import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.catalog import build_m33, build_m446  # noqa: E402
from utils.census import incidence_from_tables  # noqa: E402
from utils.golden import load_bundle  # noqa: E402
from utils.map_core import OrientedMap, Permutation  # noqa: E402
from utils.orders import compute_tables, reduce_tables  # noqa: E402


@pytest.fixture(scope="session")
def m33():
    return build_m33()


@pytest.fixture(scope="session")
def m446(m33):
    return build_m446(m33)


@pytest.fixture(scope="session")
def raw_tables(m33, m446):
    return compute_tables(m33, m446)


@pytest.fixture(scope="session")
def reduced_tables(raw_tables):
    return reduce_tables(raw_tables)


@pytest.fixture(scope="session")
def golden():
    return load_bundle()


@pytest.fixture(scope="session")
def golden_incidence(golden):
    return incidence_from_tables(golden.reduced)


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def loop_map():
    """L1: one vertex, one loop"""
    return OrientedMap(Permutation((1, 0)), Permutation((1, 0)))


@pytest.fixture
def edge_map():
    """P1: two vertices, one edge"""
    return OrientedMap(Permutation((1, 0)), Permutation((0, 1)))


@pytest.fixture
def torus_map():
    """T1: one vertex, two interleaved loops"""
    return OrientedMap(Permutation((2, 3, 0, 1)), Permutation((1, 2, 3, 0)))
