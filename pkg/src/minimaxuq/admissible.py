"""Admissible sets defined by generalized moment constraints and an optional
band around a reference response function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import CandidateCapExceeded, EmptyEnumeration, MissingFunction, UndefinedAtSupport
from .measure import DiscreteMeasure, Interval, TabulatedFunction, as_interval, make_measure, moment

FEAS_TOL = 1e-9
DEFAULT_CANDIDATE_CAP = 100_000

_RELATIONS = {"<=": "<=", "≤": "<=", "le": "<=", ">=": ">=", "≥": ">=", "ge": ">=",
              "==": "==", "=": "==", "eq": "=="}


@dataclass(frozen=True)
class MomentConstraint:
    """E_mu[g] (relation) bound."""

    g: Callable
    relation: str
    bound: float

    def __post_init__(self):
        rel = _RELATIONS.get(self.relation)
        if rel is None:
            raise ValueError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "relation", rel)
        if not math.isfinite(self.bound):
            raise ValueError("constraint bound must be finite")

    def slack(self, value: float) -> float:
        """Nonnegative when satisfied; the negative part is the violation."""
        if self.relation == "<=":
            return self.bound - value
        if self.relation == ">=":
            return value - self.bound
        return -abs(value - self.bound)

    def rows(self, gvals: np.ndarray) -> list[tuple[np.ndarray, float]]:
        """The constraint as rows ``a @ w <= b`` (equality gives two rows)."""
        if self.relation == "<=":
            return [(gvals, self.bound)]
        if self.relation == ">=":
            return [(-gvals, -self.bound)]
        return [(gvals, self.bound), (-gvals, -self.bound)]


@dataclass(frozen=True)
class FunctionBand:
    """Response functions f with sup |f - center| <= half_width."""

    center: Callable
    half_width: float

    def __post_init__(self):
        if not self.half_width >= 0:
            raise ValueError("half_width must be nonnegative")

    def bounds(self, x) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center(x), dtype=float)
        return c - self.half_width, c + self.half_width


@dataclass(frozen=True)
class AdmissibleSet:
    domain: Interval
    moment_constraints: tuple[MomentConstraint, ...] = ()
    function_band: Optional[FunctionBand] = None
    grid: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "domain", as_interval(self.domain))
        object.__setattr__(self, "moment_constraints", tuple(self.moment_constraints))
        grid = self.grid if len(self.grid) else np.linspace(self.domain.lo, self.domain.hi, 101)
        grid = tuple(sorted({float(x) for x in grid}))
        if not self.domain.contains(grid):
            raise ValueError("grid points must lie in the domain")
        object.__setattr__(self, "grid", grid)

    @property
    def n_constraints(self) -> int:
        return len(self.moment_constraints)

    def constraint_matrix(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Rows (A, b) such that weights w on ``points`` satisfy the moments iff A w <= b."""
        rows, rhs = [], []
        for c in self.moment_constraints:
            gv = np.atleast_1d(np.asarray(c.g(points), dtype=float))
            for a, b in c.rows(gv):
                rows.append(a)
                rhs.append(b)
        if not rows:
            return np.zeros((0, len(points))), np.zeros(0)
        return np.vstack(rows), np.array(rhs)

    def probe(self) -> bool:
        """Whether some measure on the grid (plus domain endpoints) satisfies every moment constraint."""
        if not self.moment_constraints:
            return True
        pts = np.array(sorted(set(self.grid) | {self.domain.lo, self.domain.hi}))
        A, b = self.constraint_matrix(pts)
        res = linprog(np.zeros(pts.size), A_ub=A, b_ub=b + FEAS_TOL / 2,
                      A_eq=np.ones((1, pts.size)), b_eq=[1.0], bounds=(0, None), method="highs")
        return res.status == 0


@dataclass(frozen=True)
class DiracParametrization:
    """Layout of the reduced finite-dimensional search space."""

    n_atoms: int
    position_bounds: tuple[float, float]
    n_weights: int
    n_function_values: int

    @property
    def dimension(self) -> int:
        return self.n_atoms + self.n_weights + self.n_function_values


def reduced_parametrization(a_set: AdmissibleSet) -> DiracParametrization:
    """k = (number of moment constraints + 1) atoms suffice for the extrema."""
    k = a_set.n_constraints + 1
    return DiracParametrization(
        n_atoms=k,
        position_bounds=(a_set.domain.lo, a_set.domain.hi),
        n_weights=k,
        n_function_values=k if a_set.function_band is not None else 0,
    )


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    slacks: tuple[float, ...]
    band_violation: float = 0.0

    def __bool__(self) -> bool:
        return self.feasible

    @property
    def max_violation(self) -> float:
        worst = max((-s for s in self.slacks), default=0.0)
        return max(worst, self.band_violation, 0.0)


def is_feasible(mu: DiscreteMeasure, f: Optional[Callable], a_set: AdmissibleSet,
                tol: float = FEAS_TOL) -> FeasibilityReport:
    """Check the moment constraints (and the band, when present)."""
    slacks = tuple(c.slack(moment(mu, c.g)) for c in a_set.moment_constraints)
    band_violation = 0.0
    if a_set.function_band is not None:
        if f is None:
            raise MissingFunction("admissible set has a function band but no function was given")
        band = a_set.function_band
        xs = np.array(sorted(set(a_set.grid) | set(mu.support)))
        values, keep = [], []
        for x in xs:
            try:
                values.append(float(f(x)))
                keep.append(x)
            except UndefinedAtSupport:
                if x in mu.support:
                    raise
        xs = np.array(keep)
        lo, hi = band.bounds(xs)
        vals = np.array(values)
        band_violation = float(max(0.0, np.max(vals - hi), np.max(lo - vals)))
    ok = all(s >= -tol for s in slacks) and band_violation <= tol
    return FeasibilityReport(ok, slacks, band_violation)


@dataclass(frozen=True)
class LatticeSpec:
    """Simplex lattice of weights (multiples of ``weight_step``) on ``positions``.

    ``band_levels`` picks the candidate response functions center + c * half_width.
    """

    weight_step: float
    positions: Optional[tuple[float, ...]] = None
    band_levels: tuple[float, ...] = (-1.0, 0.0, 1.0)

    def __post_init__(self):
        if not self.weight_step > 0:
            raise ValueError("positive step required")
        n = 1.0 / self.weight_step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("weight_step must divide 1")

    @property
    def n_units(self) -> int:
        return int(round(1.0 / self.weight_step))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Compositions of ``total`` into ``parts`` nonnegative parts, lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_candidates(a_set: AdmissibleSet, lattice: LatticeSpec,
                         cap: int = DEFAULT_CANDIDATE_CAP) -> list:
    """All feasible lattice measures, in lexicographic order of weight vectors.

    Without a band the result is a list of measures; with a band it is a list
    of ``(measure, function)`` pairs, one per band level.
    """
    positions = tuple(sorted(set(lattice.positions if lattice.positions is not None else a_set.grid)))
    if not a_set.domain.contains(positions):
        raise ValueError("lattice positions must lie in the domain")
    units = lattice.n_units
    count = math.comb(units + len(positions) - 1, len(positions) - 1)
    levels = lattice.band_levels if a_set.function_band is not None else (None,)
    if count * len(levels) > cap:
        raise CandidateCapExceeded(f"{count * len(levels)} lattice candidates exceed cap {cap}")
    out = []
    for comp in _compositions(units, len(positions)):
        mu = make_measure(positions, [c / units for c in comp], a_set.domain)
        for level in levels:
            if level is None:
                if is_feasible(mu, None, a_set):
                    out.append(mu)
                continue
            band = a_set.function_band
            f = TabulatedFunction(a_set.grid, band.center(np.array(a_set.grid)) + level * band.half_width)
            if is_feasible(mu, f, a_set):
                out.append((mu, f))
    if not out:
        raise EmptyEnumeration("no lattice candidate satisfies the constraints")
    return out
