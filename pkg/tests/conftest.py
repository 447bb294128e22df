import numpy as np
import pytest

from minimaxuq import CandidateSet, DataMap, QuantityOfInterest, TabulatedFunction, make_measure

GRID = np.linspace(0.0, 1.0, 101)


def bernoulli(p):
    return make_measure([0.0, 1.0], [1.0 - p, p])


def mean_qoi():
    return QuantityOfInterest.expectation(TabulatedFunction.identity(GRID))


def bernoulli_family(ps, data_map):
    return CandidateSet.build([bernoulli(p) for p in ps], mean_qoi(), data_map)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
