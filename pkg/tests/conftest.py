import numpy as np
import pytest

from legapprox.fixtures import get_fixture
from legapprox.homology import build_homology_basis

_sets, _bases = {}, {}


def fixture_set(name):
    if name not in _sets:
        _sets[name] = get_fixture(name)
    return _sets[name]


def fixture_basis(name):
    if name not in _bases:
        _bases[name] = build_homology_basis(fixture_set(name))
    return _bases[name]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
