import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minimaxuq import (
    AdmissibleSet,
    FunctionBand,
    LatticeSpec,
    MomentConstraint,
    TabulatedFunction,
    dirac,
    enumerate_candidates,
    is_feasible,
    make_measure,
    reduced_parametrization,
)
from minimaxuq.errors import CandidateCapExceeded, EmptyEnumeration, MissingFunction
from minimaxuq.ouq import problem1_set

GRID = np.linspace(0, 1, 11)
IDENT = TabulatedFunction.identity(GRID)


def constraint_set(n, relation="<="):
    return AdmissibleSet((0, 1), tuple(MomentConstraint(IDENT, relation, 0.5) for _ in range(n)), None, tuple(GRID))


class TestParametrization:
    @pytest.mark.parametrize("n,k", [(0, 1), (1, 2), (3, 4)])
    def test_atom_count(self, n, k):
        p = reduced_parametrization(constraint_set(n))
        assert p.n_atoms == k and p.n_weights == k and p.n_function_values == 0

    def test_band_adds_function_values(self):
        a = AdmissibleSet((0, 1), (MomentConstraint(IDENT, "<=", 0.5),), FunctionBand(IDENT, 0.1), tuple(GRID))
        p = reduced_parametrization(a)
        assert p.n_function_values == 2 and p.dimension == 6

    def test_relations_normalized(self):
        assert MomentConstraint(IDENT, "≤", 1).relation == "<="
        with pytest.raises(ValueError):
            MomentConstraint(IDENT, "<>", 1)


class TestFeasibility:
    def test_boundary_slack_zero(self):
        rep = is_feasible(make_measure([0, 0.5], [0.5, 0.5]), None, problem1_set(0.25))
        assert rep.feasible and rep.slacks[0] == pytest.approx(0.0, abs=1e-15)

    def test_violation(self):
        rep = is_feasible(dirac(1.0), None, problem1_set(0.25))
        assert not rep.feasible and rep.max_violation == pytest.approx(0.75)

    def test_band_boundary(self):
        a = AdmissibleSet((0, 1), (), FunctionBand(IDENT, 0.1), tuple(GRID))
        assert is_feasible(dirac(0.5), IDENT.shifted(0.1), a)
        assert not is_feasible(dirac(0.5), IDENT.shifted(0.11), a)

    def test_missing_function(self):
        a = AdmissibleSet((0, 1), (), FunctionBand(IDENT, 0.1), tuple(GRID))
        with pytest.raises(MissingFunction):
            is_feasible(dirac(0.5), None, a)

    def test_equality(self):
        a = AdmissibleSet((0, 1), (MomentConstraint(IDENT, "==", 0.25),), None, tuple(GRID))
        assert is_feasible(make_measure([0, 0.5], [0.5, 0.5]), None, a)
        assert not is_feasible(dirac(0.3), None, a)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.5))
    def test_monotone_in_bound(self, x, m, relax):
        mu = dirac(x)
        if is_feasible(mu, None, problem1_set(m)):
            assert is_feasible(mu, None, problem1_set(m + relax))


class TestEnumerate:
    def test_problem1_filter(self):
        a = problem1_set(0.25, grid=[0.0, 0.5, 1.0])
        out = enumerate_candidates(a, LatticeSpec(0.5, (0.0, 0.5, 1.0)))
        # exhaustive oracle over the six lattice weight vectors
        oracle = [w for w in itertools.product([0, 0.5, 1], repeat=3)
                  if sum(w) == 1 and 0.5 * w[1] + w[2] <= 0.25 + 1e-9]
        assert len(out) == len(oracle) == 2
        assert sorted(mu.mean() for mu in out) == [0.0, 0.25]

    def test_unconstrained_count(self):
        a = AdmissibleSet((0, 1), (), None, (0.0, 1.0))
        assert len(enumerate_candidates(a, LatticeSpec(0.5))) == 3

    def test_empty(self):
        a = AdmissibleSet((0, 1), (MomentConstraint(IDENT, "<=", -1),), None, tuple(GRID))
        assert not a.probe()
        with pytest.raises(EmptyEnumeration):
            enumerate_candidates(a, LatticeSpec(0.5, (0.0, 1.0)))

    def test_cap(self):
        a = AdmissibleSet((0, 1), (), None, tuple(GRID))
        with pytest.raises(CandidateCapExceeded):
            enumerate_candidates(a, LatticeSpec(0.05), cap=1000)

    def test_step_validation(self):
        with pytest.raises(ValueError, match="positive step required"):
            LatticeSpec(0.0)

    def test_band_pairs_feasible_and_ordered(self):
        a = AdmissibleSet((0, 1), (MomentConstraint(IDENT, "<=", 0.5),), FunctionBand(IDENT, 0.1), (0.0, 0.5, 1.0))
        out = enumerate_candidates(a, LatticeSpec(0.5))
        again = enumerate_candidates(a, LatticeSpec(0.5))
        assert [(mu, f.ys.tolist()) for mu, f in out] == [(mu, f.ys.tolist()) for mu, f in again]
        for mu, f in out:
            assert is_feasible(mu, f, a)
