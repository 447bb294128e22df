import numpy as np
import pytest

from minimaxuq import (
    CandidateSet,
    DataMap,
    Estimator,
    LossFunction,
    Prior,
    averaged_risk,
    bias_variance,
    statistical_error,
    worst_case_error,
)
from minimaxuq.errors import AlphabetMismatch, EmptyCandidates, LengthMismatch
from minimaxuq.risk import risk_vector

from conftest import bernoulli, bernoulli_family, mean_qoi

SQ = LossFunction.squared()


def sample_mean(cset):
    return Estimator.from_function(cset.alphabet, lambda s: sum(s) / len(s))


class TestLoss:
    def test_threshold_closed(self):
        v = LossFunction.threshold(0.4)
        assert v(0.4) == 1.0 and v(-0.4) == 1.0 and v(0.39) == 0.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            LossFunction.threshold(0.0)


class TestStatisticalError:
    def test_exact_constant(self):
        cs = bernoulli_family([0.3], DataMap.iid(2))
        assert statistical_error(Estimator.constant(cs.alphabet, 0.3), cs[0], SQ) == 0.0

    def test_bernoulli_variance(self):
        cs = bernoulli_family([0.5], DataMap.iid(1))
        assert statistical_error(sample_mean(cs), cs[0], SQ) == 0.25

    def test_threshold(self):
        cs = bernoulli_family([0.5], DataMap.iid(1))
        assert statistical_error(sample_mean(cs), cs[0], LossFunction.threshold(0.4)) == 1.0

    def test_alphabet_mismatch(self):
        cs1 = bernoulli_family([0.5], DataMap.iid(1))
        cs2 = bernoulli_family([0.5], DataMap.iid(2))
        with pytest.raises(AlphabetMismatch):
            statistical_error(sample_mean(cs1), cs2[0], SQ)

    def test_randomized(self):
        cs = bernoulli_family([0.5], DataMap.iid(1))
        mix = Estimator.mixture([Estimator.constant(cs.alphabet, 0.0), Estimator.constant(cs.alphabet, 1.0)], [0.5, 0.5])
        assert statistical_error(mix, cs[0], SQ) == 0.25
        assert not mix.is_point_mass

    def test_threshold_nonincreasing_in_gamma(self, rng):
        cs = bernoulli_family([0.2, 0.7], DataMap.iid(3))
        theta = Estimator(cs.alphabet, values=rng.random(len(cs.alphabet)))
        for c in cs.candidates:
            vals = [statistical_error(theta, c, LossFunction.threshold(g)) for g in np.linspace(0.01, 1, 50)]
            assert all(b <= a for a, b in zip(vals, vals[1:]))


class TestWorstCase:
    def test_singleton(self):
        cs = bernoulli_family([0.3], DataMap.iid(2))
        th = sample_mean(cs)
        assert worst_case_error(th, cs, SQ) == (statistical_error(th, cs[0], SQ), 0)

    def test_constant(self):
        ps = [0.1, 0.4, 0.8]
        cs = bernoulli_family(ps, DataMap.iid(1))
        v, k = worst_case_error(Estimator.constant(cs.alphabet, 0.3), cs, SQ)
        assert v == pytest.approx(max((0.3 - p) ** 2 for p in ps)) and k == 2

    def test_sample_mean_grid(self):
        ps = np.round(np.arange(1, 10) / 10, 12)
        cs = bernoulli_family(ps, DataMap.iid(2))
        v, k = worst_case_error(sample_mean(cs), cs, SQ)
        assert v == pytest.approx(0.125, abs=1e-15) and ps[k] == 0.5

    def test_ties_lowest_index(self):
        cs = bernoulli_family([0.0, 1.0], DataMap.none())
        assert worst_case_error(Estimator.constant(cs.alphabet, 0.5), cs, SQ)[1] == 0

    def test_empty(self):
        with pytest.raises(EmptyCandidates):
            worst_case_error(None, [], SQ)


class TestBiasVariance:
    @pytest.mark.parametrize("p,n", [(0.25, 1), (0.5, 3), (0.9, 4)])
    def test_sample_mean(self, p, n):
        cs = bernoulli_family([p], DataMap.iid(n))
        bv = bias_variance(sample_mean(cs), cs[0])
        assert bv.variance == pytest.approx(p * (1 - p) / n, abs=1e-15)
        assert abs(bv.bias) < 1e-15

    def test_constant(self):
        cs = bernoulli_family([0.3], DataMap.iid(2))
        bv = bias_variance(Estimator.constant(cs.alphabet, 0.5), cs[0])
        assert bv.variance == 0.0 and bv.bias == pytest.approx(0.2)

    def test_derived_instance(self):
        cs = bernoulli_family([0.25], DataMap.iid(1))
        bv = bias_variance(sample_mean(cs), cs[0])
        assert (bv.variance, bv.bias, bv.mse) == (0.1875, 0.0, 0.1875)

    def test_identity_randomized_kernel(self, rng):
        cs = bernoulli_family([0.35], DataMap.iid(3))
        ests = [Estimator(cs.alphabet, values=rng.random(len(cs.alphabet))) for _ in range(3)]
        mix = Estimator.mixture(ests, rng.dirichlet(np.ones(3)))
        bv = bias_variance(mix, cs[0])
        assert abs(bv.mse - bv.variance - bv.bias ** 2) <= 1e-12


class TestAveragedRisk:
    def test_point_prior(self):
        cs = bernoulli_family([0.2, 0.6], DataMap.iid(2))
        th = sample_mean(cs)
        assert averaged_risk(th, Prior.point(2, 1), cs, SQ) == statistical_error(th, cs[1], SQ)

    def test_uniform_mean(self):
        cs = bernoulli_family([0.2, 0.6], DataMap.iid(2))
        th = sample_mean(cs)
        r = [statistical_error(th, c, SQ) for c in cs.candidates]
        assert averaged_risk(th, Prior.uniform(2), cs, SQ) == pytest.approx(sum(r) / 2, abs=1e-15)

    def test_length(self):
        cs = bernoulli_family([0.2, 0.6], DataMap.iid(2))
        with pytest.raises(LengthMismatch):
            averaged_risk(sample_mean(cs), Prior.uniform(3), cs, SQ)

    def test_vertex_attains_max(self, rng):
        cs = bernoulli_family([0.1, 0.3, 0.5, 0.9], DataMap.iid(2))
        th = Estimator(cs.alphabet, values=rng.random(len(cs.alphabet)))
        wc, k = worst_case_error(th, cs, SQ)
        vals = [averaged_risk(th, Prior.from_array(rng.dirichlet(np.ones(4))), cs, SQ) for _ in range(500)]
        assert max(vals) <= wc + 1e-12
        assert averaged_risk(th, Prior.point(4, k), cs, SQ) == wc

    def test_vectorised_matches_exact(self, rng):
        cs = bernoulli_family([0.1, 0.3, 0.5, 0.9], DataMap.iid(4))
        th = Estimator(cs.alphabet, values=rng.random(len(cs.alphabet)))
        exact = [statistical_error(th, c, SQ) for c in cs.candidates]
        assert np.allclose(risk_vector(th, cs, SQ), exact, rtol=0, atol=1e-14)


class TestCandidateSet:
    def test_shared_alphabet(self):
        cs = CandidateSet.build([bernoulli(0.0), bernoulli(1.0)], mean_qoi(), DataMap.iid(2))
        assert cs.alphabet == ((0.0, 0.0), (1.0, 1.0))
        assert cs.likelihood.tolist() == [[1.0, 0.0], [0.0, 1.0]]

    def test_no_data(self):
        cs = bernoulli_family([0.2, 0.8], DataMap.none())
        assert cs.alphabet == ((),) and cs.likelihood.tolist() == [[1.0], [1.0]]
