"""Optimal confidence intervals: the smallest half-width gamma whose
threshold-loss game value is at most epsilon, found by bisection.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NonMonotoneDetected
from .game import GameOptions, GameSolution, minimax_estimator
from .ouq import SolverOptions, lower_bound, upper_bound
from .risk import CandidateSet, Estimator, LossFunction, worst_case_error

GAMMA_TOL = 1e-6
VALUE_TOL = 1e-9
MONOTONE_TOL = 1e-7


def threshold_game(gamma: float, cset: CandidateSet, opts: Optional[GameOptions] = None) -> GameSolution:
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return minimax_estimator(cset, LossFunction.threshold(gamma), opts)


def threshold_game_value(gamma: float, cset: CandidateSet, opts: Optional[GameOptions] = None) -> float:
    """inf over (randomized) estimators of the worst-case P(|theta(D) - Phi| >= gamma)."""
    return threshold_game(gamma, cset, opts).minimax_value


def chebyshev_estimator(cset: CandidateSet) -> Estimator:
    """Per symbol, the midpoint of the Phi values of the candidates that can produce it."""
    lo = np.where(cset.likelihood > 0, cset.phi[:, None], np.inf).min(axis=0)
    hi = np.where(cset.likelihood > 0, cset.phi[:, None], -np.inf).max(axis=0)
    mid = 0.5 * (cset.phi.min() + cset.phi.max())
    return Estimator(cset.alphabet, values=np.where(np.isfinite(lo), 0.5 * (lo + hi), mid))


@dataclass
class ConfidenceResult:
    gamma_eps: float
    estimator: Estimator
    epsilon: float
    game_value_at_gamma: float
    bisection_trace: list = field(default_factory=list)
    deterministic_value: float = float("nan")
    randomized_value: float = float("nan")
    status: str = "converged"

    def interval(self, symbol_index: int) -> tuple[float, float]:
        """[theta(d) - gamma_eps, theta(d) + gamma_eps] for a deterministic estimator."""
        if self.estimator.is_randomized:
            raise ValueError("interval centers are random for a randomized estimator")
        c = float(self.estimator.values[symbol_index])
        return c - self.gamma_eps, c + self.gamma_eps

    def curve_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma", "value"])
        for g, v in sorted(self.bisection_trace):
            w.writerow([repr(g), repr(v)])
        return buf.getvalue()


def _check_monotone(trace: list) -> None:
    pts = sorted(trace)
    for (g1, v1), (g2, v2) in zip(pts, pts[1:]):
        if v2 > v1 + MONOTONE_TOL:
            raise NonMonotoneDetected(f"game value rises from {v1} at gamma={g1} to {v2} at gamma={g2}")


def optimal_confidence_interval(epsilon: float, cset: CandidateSet, opts: Optional[GameOptions] = None,
                                tol: float = GAMMA_TOL) -> ConfidenceResult:
    """Bisection for gamma_eps over [0, U - L] with U, L the extreme Phi values.

    The returned estimator is the best deterministic one among the double
    oracle's pure strategies and the per-symbol Chebyshev center (ties go
    to the latter), provided its worst-case threshold risk stays within
    epsilon; otherwise the randomized minimax estimator is returned.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    lo_phi, hi_phi = cset.phi_range
    width = hi_phi - lo_phi
    if width == 0.0:
        est = Estimator.constant(cset.alphabet, lo_phi)
        return ConfidenceResult(0.0, est, epsilon, 0.0, [], 0.0, 0.0)
    lo, hi = 0.0, width
    trace = []
    hi_solution = None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        sol = threshold_game(mid, cset, opts)
        trace.append((mid, sol.minimax_value))
        if sol.minimax_value <= epsilon + VALUE_TOL:
            hi, hi_solution = mid, sol
        else:
            lo = mid
    _check_monotone(trace)
    if hi_solution is None:
        hi_solution = threshold_game(hi, cset, opts)
        trace.append((hi, hi_solution.minimax_value))
    loss = LossFunction.threshold(hi)
    cheb = chebyshev_estimator(cset)
    best, best_val = cheb, worst_case_error(cheb, cset, loss)[0]
    for e in hi_solution.pure_estimators:
        v = worst_case_error(e, cset, loss)[0]
        if v < best_val:
            best, best_val = e, v
    randomized_value = hi_solution.minimax_value
    if best_val <= epsilon + VALUE_TOL:
        chosen, value = best, best_val
    else:
        chosen, value = hi_solution.estimator, randomized_value
    status = "converged" if hi_solution.status == "converged" else "best_found"
    return ConfidenceResult(hi, chosen, epsilon, value, trace, best_val, randomized_value, status)


def midpoint_estimator(a_set, phi, opts: Optional[SolverOptions] = None) -> float:
    """(L + U) / 2 from the optimal bounds over the admissible set."""
    lo = lower_bound(a_set, phi, opts).value
    hi = upper_bound(a_set, phi, opts).value
    return 0.5 * (lo + hi)
