"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line (shown even when output is captured).
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from minimaxuq import (
    AdmissibleSet,
    CandidateSet,
    DataMap,
    Estimator,
    LossFunction,
    MomentConstraint,
    Prior,
    QuantityOfInterest,
    SolverOptions,
    TabulatedFunction,
    averaged_risk,
    bayes_estimator,
    bias_variance,
    make_measure,
    markov_oracle,
    minimax_estimator,
    mix_estimators,
    upper_bound,
    worst_case_error,
)
from minimaxuq.brittleness import demo_a, demo_b, random_singular_instance, sandwich_check, version_family
from minimaxuq.confidence import optimal_confidence_interval
from minimaxuq.ouq import problem1_set
from minimaxuq.risk import risk_vector

GRID = np.linspace(0.0, 1.0, 101)
IDENT = TabulatedFunction.identity(GRID)
SQ = LossFunction.squared()


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}")
        assert ok, detail
    return emit


def bernoulli_grid(n):
    ps = np.round(np.arange(11) / 10, 12)
    return CandidateSet.build([make_measure([0, 1], [1 - p, p]) for p in ps],
                              QuantityOfInterest.expectation(IDENT), DataMap.iid(n))


def random_measure(rng, size=None):
    s = size or int(rng.integers(1, 5))
    return make_measure(rng.choice(GRID, size=s, replace=False), rng.dirichlet(np.ones(s)))


def test_01_markov_bound(report):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        a = float(rng.uniform(0.05, 1.0))
        m = float(rng.uniform(0.01, 1.0) * a)
        phi = QuantityOfInterest.tail_probability(IDENT, a)
        worst = max(worst, abs(upper_bound(problem1_set(m), phi).value - markov_oracle(m, a)))
    elapsed = time.perf_counter() - start
    report(1, "Markov-bound regression", worst <= 1e-6 and elapsed < 30,
           f"max |U - min(1, m/a)| = {worst:.2e} over 50 pairs in {elapsed:.1f} s")


def test_02_reduction_witness(report):
    rng = np.random.default_rng(2)
    basis = [lambda x: x, lambda x: x ** 2, lambda x: np.sin(3 * x), lambda x: (x - 0.3) ** 2, lambda x: np.exp(-x)]
    worst = 0.0
    for t in range(20):
        idx = rng.choice(len(basis), size=int(rng.integers(1, 4)), replace=False)
        mu = random_measure(rng, 4)
        cons = []
        for i in idx:
            g = TabulatedFunction.from_callable(basis[i], GRID)
            val = float(np.dot(mu.weights, g(np.array(mu.support))))
            rel = str(rng.choice(["<=", ">="]))
            cons.append(MomentConstraint(g, rel, val + (0.01 if rel == "<=" else -0.01)))
        a_set = AdmissibleSet((0, 1), tuple(cons), None, tuple(GRID))
        if t % 2:
            phi = QuantityOfInterest.tail_probability(IDENT, float(rng.uniform(0.3, 0.9)))
        else:
            phi = QuantityOfInterest.expectation(TabulatedFunction.from_callable(lambda x: np.cos(4 * x), GRID))
        k = len(cons) + 1
        opts = SolverOptions(restarts=8, seed=t)
        vk = upper_bound(a_set, phi, replace(opts, n_atoms=k)).value
        vk1 = upper_bound(a_set, phi, replace(opts, n_atoms=k + 1)).value
        worst = max(worst, vk1 - vk)
    report(2, "Reduction-theorem witness", worst <= 1e-6,
           f"largest improvement from one extra atom = {worst:.2e} over 20 instances")


def test_03_bias_variance(report):
    rng = np.random.default_rng(3)
    worst = 0.0
    for t in range(100):
        mu = random_measure(rng)
        cs = CandidateSet.build([mu], QuantityOfInterest.expectation(IDENT), DataMap.iid(int(rng.integers(1, 4))))
        A = len(cs.alphabet)
        if t % 2:
            est = Estimator(cs.alphabet, values=rng.uniform(-1, 2, A))
        else:
            est = Estimator.mixture([Estimator(cs.alphabet, values=rng.uniform(-1, 2, A)) for _ in range(3)],
                                    rng.dirichlet(np.ones(3)))
        bv = bias_variance(est, cs[0])
        worst = max(worst, abs(bv.mse - bv.variance - bv.bias ** 2))
    report(3, "Bias/variance identity", worst <= 1e-12, f"max |mse - var - bias^2| = {worst:.2e} over 100 pairs")


def test_04_prior_linearity(report):
    rng = np.random.default_rng(4)
    cs = CandidateSet.build([random_measure(rng) for _ in range(6)], QuantityOfInterest.expectation(IDENT),
                            DataMap.iid(2))
    est = Estimator(cs.alphabet, values=rng.random(len(cs.alphabet)))
    wc, k = worst_case_error(est, cs, SQ)
    best = max(averaged_risk(est, Prior.from_array(rng.dirichlet(np.ones(len(cs)))), cs, SQ) for _ in range(10_000))
    vertex = averaged_risk(est, Prior.point(len(cs), k), cs, SQ)
    ok = best <= wc + 1e-12 and vertex == wc
    report(4, "Prior-linearity identity", ok,
           f"max over 1e4 priors {best:.6f} <= worst case {wc:.6f}; vertex {k} attains it exactly")


def test_05_orthogonality(report):
    rng = np.random.default_rng(5)
    cs = CandidateSet.build([random_measure(rng) for _ in range(5)], QuantityOfInterest.expectation(IDENT),
                            DataMap.iid(3))
    worst = 0.0
    for _ in range(100):
        pi = Prior.from_array(rng.dirichlet(np.ones(len(cs))))
        th = Estimator(cs.alphabet, values=rng.uniform(-1, 2, len(cs.alphabet)))
        th_pi = bayes_estimator(pi, cs, SQ)
        marg = pi.array @ cs.likelihood
        rhs = averaged_risk(th_pi, pi, cs, SQ) + float(np.sum(marg * (th.values - th_pi.values) ** 2))
        worst = max(worst, abs(averaged_risk(th, pi, cs, SQ) - rhs))
    report(5, "Orthogonality decomposition", worst <= 1e-12, f"max residual {worst:.2e} over 100 (theta, prior) pairs")


def _duality_instances(rng):
    out = []
    for t in range(20):
        K = int(rng.integers(2, 13))
        if t % 4 == 0:
            A = int(rng.integers(2, 60))
            lik = rng.dirichlet(np.ones(A) * rng.uniform(0.2, 2), size=K)
            out.append(CandidateSet.from_table(rng.random(K), lik))
            continue
        s = 5 if t == 1 else int(rng.integers(2, 5))
        n = 15 if t == 1 else int(rng.integers(1, 8))
        pts = np.sort(rng.choice(GRID, s, replace=False))
        items = [make_measure(pts, rng.dirichlet(np.ones(s))) for _ in range(K)]
        phi = (QuantityOfInterest.tail_probability(IDENT, 0.5) if t % 2
               else QuantityOfInterest.expectation(TabulatedFunction.from_callable(np.square, GRID)))
        out.append(CandidateSet.build(items, phi, DataMap.iid(n, cap=10_000)))
    return out


def test_06_duality(report):
    rng = np.random.default_rng(6)
    worst_gap = worst_diff = slowest = 0.0
    largest = 0
    for cs in _duality_instances(rng):
        assert len(cs) <= 12 and len(cs.alphabet) <= 10_000
        start = time.perf_counter()
        sol = minimax_estimator(cs)
        slowest = max(slowest, time.perf_counter() - start)
        bayes = bayes_estimator(sol.least_favorable_prior, cs, SQ, version="likelihood_mean")
        worst_gap = max(worst_gap, sol.duality_gap)
        worst_diff = max(worst_diff, float(np.max(np.abs(bayes.values - sol.estimator.values))))
        largest = max(largest, len(cs.alphabet))
    ok = worst_gap <= 1e-6 and worst_diff <= 1e-9 and slowest < 10
    report(6, "Complete-class duality", ok,
           f"max gap {worst_gap:.2e}, max |minimax - Bayes(LFP)| {worst_diff:.1e}, slowest {slowest:.2f} s, "
           f"largest alphabet {largest}")


def test_07_confidence_no_data(report):
    ps = [0.1, 0.25, 0.5, 0.8]
    cs = CandidateSet.build([make_measure([0, 1], [1 - p, p]) for p in ps], QuantityOfInterest.expectation(IDENT),
                            DataMap.none())
    res = optimal_confidence_interval(0.0, cs)
    lo, hi = min(ps), max(ps)
    trace = sorted(res.bisection_trace)
    monotone = all(v2 <= v1 + 1e-9 for (_, v1), (_, v2) in zip(trace, trace[1:]))
    err_g = abs(res.gamma_eps - (hi - lo) / 2)
    err_t = abs(res.estimator.values[0] - (hi + lo) / 2)
    report(7, "Confidence interval without data", err_g <= 1e-6 and err_t <= 1e-9 and monotone,
           f"|gamma_0 - (U-L)/2| = {err_g:.1e}, |theta - midpoint| = {err_t:.1e}, monotone trace = {monotone}")


def test_08_experiment_order(report):
    values = [minimax_estimator(bernoulli_grid(n)).minimax_value for n in range(1, 5)]
    ok = all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    report(8, "Experiment ordering", ok, "minimax values n=1..4: " + ", ".join(f"{v:.6f}" for v in values))


def test_09_mixing(report):
    rng = np.random.default_rng(9)
    cs = bernoulli_grid(2)
    worst = -np.inf
    for _ in range(20):
        pair = [Estimator(cs.alphabet, values=rng.random(len(cs.alphabet))) for _ in range(2)]
        res = mix_estimators(pair, cs)
        worst = max(worst, res.value - min(res.vertex_values))
    report(9, "Estimator mixing", worst <= 1e-12, f"max (mixture - best vertex) = {worst:.2e} over 20 pairs")


def test_10_brittleness_sandwich(report):
    start = time.perf_counter()
    ra = sandwich_check(*demo_a())
    rb = sandwich_check(*demo_b())
    rng = np.random.default_rng(10)
    ratios, all_ok = [], True
    for _ in range(200):
        rep = sandwich_check(*random_singular_instance(rng))
        ratios.append(rep.ratio)
        all_ok &= rep.lower_ok and rep.upper_ok and rep.reproduced
    elapsed = time.perf_counter() - start
    ok = (abs(ra.ratio - 0.25) <= 1e-9 and abs(rb.ratio - 1.0) <= 1e-9 and ra.reproduced and rb.reproduced
          and all_ok and elapsed < 60)
    report(10, "Brittleness sandwich", ok,
           f"demo A ratio {ra.ratio}, demo B ratio {rb.ratio}, random ratios in [{min(ratios):.4f}, "
           f"{max(ratios):.4f}], witnesses reproduce gap, {elapsed:.2f} s")


def test_11_version_risk_equality(report):
    rng = np.random.default_rng(11)
    pi, _, cs = random_singular_instance(rng, 6, 10)
    fam = version_family(pi, cs)
    base = averaged_risk(fam.base, pi, cs, SQ)
    worst = max(abs(averaged_risk(fam.random_member(rng), pi, cs, SQ) - base) for _ in range(100))
    report(11, "Version risk equality under the prior", worst <= 1e-12,
           f"max risk difference {worst:.2e} over 100 versions ({fam.null_atoms.size} null atoms)")
