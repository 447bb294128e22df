"""Versions of the conditional expectation on null data and the sandwich
bounds on how far their risks can drift under a second prior.

Given a prior pi and a data map, the posterior mean is only fixed on data
symbols of positive pi-marginal mass.  A second prior pi_dagger that puts
mass on the remaining (null) symbols can tell versions apart; the worst
discrepancy, normalised by (U - L)^2 times the null mass, lies in [1/4, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AbsolutelyContinuous, DegenerateRange, LengthMismatch, NotOrthogonal
from .game import bayes_estimator
from .measure import DataDistribution, QuantityOfInterest, TabulatedFunction, make_measure
from .risk import CandidateSet, DataMap, Estimator, LossFunction, Prior, averaged_risk

NULL_TOL = 1e-15
RATIO_TOL = 1e-9
REPRO_TOL = 1e-12


@dataclass(frozen=True)
class JointTable:
    """Entries pi_k * L_k(d) of the joint law of (candidate, data)."""

    matrix: np.ndarray
    alphabet: tuple

    @property
    def total(self) -> float:
        return math.fsum(self.matrix.ravel().tolist())

    @property
    def candidate_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def data_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


def joint_and_marginals(prior: Prior, cset: CandidateSet) -> tuple[JointTable, DataDistribution]:
    pi = prior.array
    if pi.size != len(cset):
        raise LengthMismatch(f"prior has {pi.size} weights for {len(cset)} candidates")
    joint = pi[:, None] * cset.likelihood
    table = JointTable(joint, cset.alphabet)
    if abs(table.total - 1.0) > 1e-12 or np.max(np.abs(table.candidate_marginal - pi)) > 1e-12:
        raise ValueError("joint table marginals are inconsistent")
    marg = np.clip(table.data_marginal, 0.0, None)
    return table, DataDistribution(cset.alphabet, tuple((marg / marg.sum()).tolist()))


def null_atoms(prior: Prior, cset: CandidateSet) -> np.ndarray:
    """Indices of data symbols with pi-marginal mass at most NULL_TOL."""
    marg = prior.array @ cset.likelihood
    return np.nonzero(marg <= NULL_TOL)[0]


@dataclass
class VersionFamily:
    """Posterior-mean versions: free values in [L, U] on the null atoms."""

    base: Estimator
    null_atoms: np.ndarray
    free_range: tuple[float, float]

    def member(self, assignment: Sequence[float]) -> Estimator:
        assignment = np.asarray(assignment, dtype=float)
        if assignment.shape != self.null_atoms.shape:
            raise LengthMismatch("one value per null atom required")
        lo, hi = self.free_range
        if np.any(assignment < lo) or np.any(assignment > hi):
            raise ValueError("version values must lie in the Phi range")
        values = np.array(self.base.values)
        values[self.null_atoms] = assignment
        return Estimator(self.base.alphabet, values=values)

    def random_member(self, rng: np.random.Generator) -> Estimator:
        lo, hi = self.free_range
        return self.member(rng.uniform(lo, hi, size=self.null_atoms.size))


def version_family(prior: Prior, cset: CandidateSet) -> VersionFamily:
    base = bayes_estimator(prior, cset, LossFunction.squared())
    return VersionFamily(base, null_atoms(prior, cset), cset.phi_range)


@dataclass
class VersionGap:
    sup_gap: float
    ratio: float
    null_atoms: np.ndarray
    null_mass: float
    denominator: float
    atom_mass: np.ndarray
    atom_mean: np.ndarray
    y_assignment: np.ndarray
    z_assignment: np.ndarray
    theta1: Estimator
    theta2: Estimator


def version_gap(pi: Prior, pi_dagger: Prior, cset: CandidateSet) -> VersionGap:
    """Largest difference of pi_dagger-risks between two versions under pi.

    Atom by atom, theta2 sits at the Phi endpoint farthest from the
    pi_dagger conditional mean gamma_b and theta1 sits at gamma_b itself.
    """
    lo, hi = cset.phi_range
    if hi == lo:
        raise DegenerateRange("all candidates share one Phi value")
    if len(pi_dagger) != len(cset):
        raise LengthMismatch(f"prior has {len(pi_dagger)} weights for {len(cset)} candidates")
    family = version_family(pi, cset)
    atoms = family.null_atoms
    joint_dag = pi_dagger.array[:, None] * cset.likelihood[:, atoms]
    mass = joint_dag.sum(axis=0)
    keep = mass > 0
    atoms, joint_dag, mass = atoms[keep], joint_dag[:, keep], mass[keep]
    null_mass = math.fsum(mass.tolist())
    if null_mass == 0.0:
        raise AbsolutelyContinuous("second prior puts no data mass where the first has none")
    gamma = (joint_dag.T @ cset.phi) / mass
    gamma = np.clip(gamma, lo, hi)
    y = np.where(hi - gamma >= gamma - lo, hi, lo)
    sup_gap = math.fsum((mass * (y - gamma) ** 2).tolist())
    denominator = (hi - lo) ** 2 * null_mass
    ratio = sup_gap / denominator
    if not (0.25 - RATIO_TOL <= ratio <= 1.0 + RATIO_TOL):
        raise AssertionError(f"sandwich violated: ratio {ratio}")
    full = family.null_atoms
    y_full = np.array(family.base.values)[full]
    z_full = y_full.copy()
    pos = np.searchsorted(full, atoms)
    y_full[pos], z_full[pos] = y, gamma
    theta2 = family.member(y_full)
    theta1 = family.member(z_full)
    return VersionGap(sup_gap, ratio, atoms, null_mass, denominator, mass, gamma, y, gamma, theta1, theta2)


@dataclass
class SandwichReport:
    ratio: float
    lower_ok: bool
    upper_ok: bool
    sup_gap: float
    risk_theta1: float
    risk_theta2: float
    reproduced: bool
    gap: VersionGap = field(repr=False)


def sandwich_check(pi: Prior, pi_dagger: Prior, cset: CandidateSet) -> SandwichReport:
    gap = version_gap(pi, pi_dagger, cset)
    sq = LossFunction.squared()
    r1 = averaged_risk(gap.theta1, pi_dagger, cset, sq)
    r2 = averaged_risk(gap.theta2, pi_dagger, cset, sq)
    return SandwichReport(
        ratio=gap.ratio,
        lower_ok=gap.ratio >= 0.25 - RATIO_TOL,
        upper_ok=gap.ratio <= 1.0 + RATIO_TOL,
        sup_gap=gap.sup_gap,
        risk_theta1=r1,
        risk_theta2=r2,
        reproduced=abs((r2 - r1) - gap.sup_gap) <= REPRO_TOL,
        gap=gap,
    )


def midpoint_comparison(pi: Prior, pi_dagger: Prior, cset: CandidateSet) -> tuple[float, float]:
    """(sup_gap, pi_dagger-risk of the constant (L + U) / 2) for mutually singular data laws."""
    atoms = null_atoms(pi, cset)
    dag_mass = math.fsum((pi_dagger.array @ cset.likelihood[:, atoms]).tolist())
    if dag_mass < 1.0 - 1e-12:
        raise NotOrthogonal(f"second prior has only {dag_mass} of its data mass on null symbols")
    gap = version_gap(pi, pi_dagger, cset)
    lo, hi = cset.phi_range
    mid = Estimator.constant(cset.alphabet, 0.5 * (lo + hi))
    risk = averaged_risk(mid, pi_dagger, cset, LossFunction.squared())
    if gap.sup_gap < risk - 1e-12:
        raise AssertionError(f"midpoint risk {risk} exceeds version gap {gap.sup_gap}")
    return gap.sup_gap, risk


# --- shipped instances ------------------------------------------------------------

def demo_a() -> tuple[Prior, Prior, CandidateSet]:
    """Dirac masses at 0, 1, 2; Phi = E[X]/2; only 1{X = 1} is observed.  Ratio 1/4."""
    grid = (0.0, 1.0, 2.0)
    domain = (0.0, 2.0)
    cands = [make_measure([x], [1.0], domain) for x in grid]
    qoi = QuantityOfInterest.expectation(TabulatedFunction(grid, (0.0, 0.5, 1.0), "exact"))
    g = TabulatedFunction(grid, (0.0, 1.0, 0.0), "exact")
    cset = CandidateSet.build(cands, qoi, DataMap.coarse(g, 1))
    return Prior.point(3, 1), Prior((0.25, 0.5, 0.25)), cset


def demo_b() -> tuple[Prior, Prior, CandidateSet]:
    """Uniform on {0, 1} versus a Dirac mass at 2; Phi = P(X >= 1), X observed.  Ratio 1."""
    grid = (0.0, 1.0, 2.0)
    domain = (0.0, 2.0)
    cands = [make_measure([0.0, 1.0], [0.5, 0.5], domain), make_measure([2.0], [1.0], domain)]
    qoi = QuantityOfInterest.tail_probability(TabulatedFunction.identity(grid), 1.0)
    cset = CandidateSet.build(cands, qoi, DataMap.iid(1))
    return Prior.point(2, 0), Prior((0.5, 0.5)), cset


def random_singular_instance(rng: np.random.Generator, n_candidates: Optional[int] = None,
                             n_symbols: Optional[int] = None) -> tuple[Prior, Prior, CandidateSet]:
    """Random finite instance whose second prior charges symbols null under the first."""
    K = n_candidates or int(rng.integers(3, 9))
    A = n_symbols or int(rng.integers(3, 12))
    phi = rng.uniform(-1.0, 2.0, size=K)
    phi[0], phi[1] = phi.min() - 0.1, phi.max() + 0.1  # keep the range nondegenerate
    support = rng.choice(K, size=int(rng.integers(1, K)), replace=False)
    null = rng.choice(A, size=int(rng.integers(1, A)), replace=False)
    lik = rng.exponential(size=(K, A)) * (rng.random((K, A)) < 0.7)
    lik[np.ix_(support, null)] = 0.0
    for k in range(K):
        if lik[k].sum() == 0.0:
            choices = np.setdiff1d(np.arange(A), null) if k in support else np.arange(A)
            lik[k, rng.choice(choices)] = 1.0
    outside = np.setdiff1d(np.arange(K), support)
    lik[outside[0], null[0]] += 1.0  # guarantee a charged null symbol
    lik /= lik.sum(axis=1, keepdims=True)
    cset = CandidateSet.from_table(phi, lik)
    w = np.zeros(K)
    w[support] = rng.dirichlet(np.ones(support.size))
    wd = rng.dirichlet(np.ones(K))
    wd[outside[0]] += 0.1
    return Prior.from_array(w), Prior.from_array(wd), cset
