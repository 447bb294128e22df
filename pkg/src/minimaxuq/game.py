"""The estimation game between the statistician and Nature.

Squared loss: the Bayes risk of a prior is concave in the prior, with
gradient equal to the candidate risks of the posterior-mean estimator.
The least favorable prior is found by projected gradient ascent and the
minimax estimator is its Bayes estimator; the duality gap certifies it.

Threshold loss: a double oracle over deterministic estimators and candidate
supports, with each restricted matrix game solved as a linear program.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import DegeneratePrior, EmptyCandidates, LengthMismatch, NonConvergence, NonConvexLoss
from .ouq import simplex_projection
from .risk import (
    CandidateSet,
    DataMap,
    Estimator,
    LossFunction,
    Prior,
    averaged_risk,
    risk_vector,
    worst_case_error,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GameOptions:
    max_iters: int = 5000
    grad_tol: float = 1e-9
    gap_tol: float = 1e-6
    do_tol: float = 1e-9
    do_max_iters: int = 500
    mix_iters: int = 4000


@dataclass
class GameSolution:
    estimator: Estimator
    least_favorable_prior: Prior
    minimax_value: float
    maximin_value: float
    duality_gap: float
    iterations: int
    status: str = "converged"
    trajectory: list = field(default_factory=list)
    pure_estimators: list = field(default_factory=list)
    mixture_weights: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.status == "converged"


# --- Bayes estimators -----------------------------------------------------------

def _posterior_mean(pi: np.ndarray, cset: CandidateSet, version: str) -> np.ndarray:
    joint = pi[:, None] * cset.likelihood
    marg = joint.sum(axis=0)
    if not np.any(marg > 0):
        raise DegeneratePrior("prior gives zero mass to every data symbol")
    num = joint.T @ cset.phi
    theta = np.empty_like(marg)
    pos = marg > 0
    theta[pos] = num[pos] / marg[pos]
    null = ~pos
    if np.any(null):
        prior_mean = float(pi @ cset.phi)
        if version == "prior_mean":
            theta[null] = prior_mean
        elif version == "likelihood_mean":
            lk = cset.likelihood[:, null]
            tot = lk.sum(axis=0)
            fill = np.full(tot.shape, prior_mean)
            ok = tot > 0
            fill[ok] = (lk[:, ok].T @ cset.phi) / tot[ok]
            theta[null] = fill
        else:
            raise ValueError(f"unknown version policy {version!r}")
    # a posterior mean lies in the hull of the Phi values
    return np.clip(theta, cset.phi.min(), cset.phi.max())


def _window_response(weights: np.ndarray, cset: CandidateSet, gamma: float) -> np.ndarray:
    """Per symbol, the center of a window (t - gamma, t + gamma) with maximal mass.

    ``weights`` is (K, A): unnormalised posterior weights of each candidate.
    """
    vals, inv = np.unique(cset.phi, return_inverse=True)
    agg = np.zeros((vals.size, weights.shape[1]))
    np.add.at(agg, inv, weights)
    csum = np.vstack([np.zeros((1, agg.shape[1])), np.cumsum(agg, axis=0)])
    # right end of the window opened at each value: values with v_j - v_i < 2 gamma
    right = np.searchsorted(vals, vals + 2.0 * gamma, side="left") - 1
    right = np.maximum(right, np.arange(vals.size))
    mass = csum[right + 1] - csum[np.arange(vals.size)]
    best = np.argmax(mass, axis=0)
    return 0.5 * (vals[best] + vals[right[best]])


def bayes_estimator(prior: Prior, cset: CandidateSet, loss: LossFunction,
                    version: str = "prior_mean") -> Estimator:
    """Bayes response to ``prior``.

    Squared loss gives the posterior mean of Phi; threshold loss gives the
    center of the length-2 gamma window of largest posterior mass.  Symbols
    with zero marginal get the prior mean (or, with
    ``version="likelihood_mean"``, the likelihood-weighted mean of Phi over
    the candidates able to produce them).
    """
    pi = prior.array
    if pi.size != len(cset):
        raise LengthMismatch(f"prior has {pi.size} weights for {len(cset)} candidates")
    if loss.kind == "squared":
        return Estimator(cset.alphabet, values=_posterior_mean(pi, cset, version))
    joint = pi[:, None] * cset.likelihood
    marg = joint.sum(axis=0)
    if not np.any(marg > 0):
        raise DegeneratePrior("prior gives zero mass to every data symbol")
    theta = _window_response(joint, cset, loss.gamma)
    null = ~(marg > 0)
    if np.any(null):
        theta[null] = _posterior_mean(pi, cset, version)[null]
    return Estimator(cset.alphabet, values=theta)


# --- squared loss: least favorable prior -----------------------------------------

def bayes_risk(pi: np.ndarray, cset: CandidateSet) -> float:
    """Posterior-variance form of the Bayes risk under squared loss."""
    joint = pi[:, None] * cset.likelihood
    marg = joint.sum(axis=0)
    num = joint.T @ cset.phi
    pos = marg > 0
    second = float(pi @ (cset.likelihood.sum(axis=1) * cset.phi ** 2))
    return second - float(np.sum(num[pos] ** 2 / marg[pos]))


def bayes_risk_gradient(pi: np.ndarray, cset: CandidateSet) -> np.ndarray:
    """Risks of the posterior mean at every candidate.

    On symbols of zero marginal the one-sided derivative uses the
    candidate's own Phi (those symbols contribute nothing).
    """
    joint = pi[:, None] * cset.likelihood
    marg = joint.sum(axis=0)
    num = joint.T @ cset.phi
    pos = marg > 0
    theta = np.zeros_like(marg)
    theta[pos] = num[pos] / marg[pos]
    diff = theta[None, :] - cset.phi[:, None]
    diff[:, ~pos] = 0.0
    return np.einsum("kd,kd->k", cset.likelihood, diff * diff)


def _fw_gap(pi: np.ndarray, grad: np.ndarray) -> float:
    return float(grad.max() - pi @ grad)


def least_favorable_prior(cset: CandidateSet, loss: Optional[LossFunction] = None,
                          opts: Optional[GameOptions] = None):
    """Prior maximising the Bayes risk; returns ``(prior, bayes_risk)``.

    Squared loss: spectral projected gradient ascent with a nonmonotone
    Armijo line search, stopped when the projected-gradient step falls
    below ``grad_tol``; an SQP polish runs if the Frank-Wolfe gap (which
    equals the duality gap) is still above ``gap_tol``.  Threshold loss:
    Nature's mixed strategy from the double oracle.
    """
    loss = loss or LossFunction.squared()
    opts = opts or GameOptions()
    if len(cset) == 0:
        raise EmptyCandidates("no candidates")
    if loss.kind != "squared":
        sol = _double_oracle(cset, loss, opts)
        return sol.least_favorable_prior, sol.maximin_value
    pi, value, _, _ = _ascent(cset, opts)
    return Prior.from_array(pi), value


def _ascent(cset: CandidateSet, opts: GameOptions):
    K = len(cset)
    pi = np.full(K, 1.0 / K)
    if K == 1:
        return pi, bayes_risk(pi, cset), 0, [0.0]
    f = bayes_risk(pi, cset)
    g = bayes_risk_gradient(pi, cset)
    history = [f]
    trajectory = [f]
    alpha = 1.0 / max(np.abs(g).max(), 1e-12)
    it = 0
    for it in range(1, opts.max_iters + 1):
        step_dir = simplex_projection(pi + alpha * g) - pi
        if np.linalg.norm(simplex_projection(pi + g) - pi) <= opts.grad_tol:
            break
        ref = max(history[-10:])
        lam = 1.0
        while True:
            cand = pi + lam * step_dir
            fc = bayes_risk(cand, cset)
            if fc >= ref + 1e-4 * lam * float(g @ step_dir) or lam < 1e-12:
                break
            lam *= 0.5
        s = cand - pi
        gc = bayes_risk_gradient(cand, cset)
        y = gc - g
        sy = float(s @ y)
        alpha = float(s @ s) / -sy if sy < 0 else 1e6
        alpha = min(max(alpha, 1e-10), 1e10)
        pi, f, g = np.clip(cand, 0.0, None), fc, gc
        pi /= pi.sum()
        history.append(f)
        trajectory.append(f)
        if _fw_gap(pi, g) <= 1e-13:
            break
    if _fw_gap(pi, g) > opts.gap_tol:
        pi = _polish(pi, cset)
        f = bayes_risk(pi, cset)
        trajectory.append(f)
    return pi, bayes_risk(pi, cset), it, trajectory


def _polish(pi0: np.ndarray, cset: CandidateSet) -> np.ndarray:
    K = len(cset)
    res = minimize(lambda p: -bayes_risk(np.clip(p, 0, None), cset), pi0,
                   jac=lambda p: -bayes_risk_gradient(np.clip(p, 0, None), cset),
                   bounds=[(0.0, 1.0)] * K,
                   constraints=[{"type": "eq", "fun": lambda p: p.sum() - 1.0, "jac": lambda p: np.ones(K)}],
                   method="SLSQP", options={"ftol": 1e-15, "maxiter": 1000})
    p = simplex_projection(res.x)
    return p if bayes_risk(p, cset) >= bayes_risk(pi0, cset) else pi0


# --- threshold loss: double oracle ------------------------------------------------

def solve_matrix_game(M: np.ndarray):
    """Value and optimal mixed strategies of the zero-sum game where the row
    player pays M[i, j] to the column player.  Returns ``(value, x, y)``.
    """
    n, m = M.shape
    # row player: minimise v s.t. M^T x <= v
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.hstack([M.T, -np.ones((m, 1))])
    A_eq = np.zeros((1, n + 1))
    A_eq[0, :n] = 1.0
    rx = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=[1.0],
                 bounds=[(0, None)] * n + [(None, None)], method="highs-ds")
    # column player: maximise u s.t. M y >= u
    A_ub2 = np.hstack([-M, np.ones((n, 1))])
    A_eq2 = np.zeros((1, m + 1))
    A_eq2[0, :m] = 1.0
    ry = linprog(-np.concatenate([np.zeros(m), [1.0]]), A_ub=A_ub2, b_ub=np.zeros(n), A_eq=A_eq2,
                 b_eq=[1.0], bounds=[(0, None)] * m + [(None, None)], method="highs-ds")
    if rx.status != 0 or ry.status != 0:
        raise NonConvergence(f"matrix game LP failed: {rx.message} / {ry.message}")
    x = np.clip(rx.x[:n], 0, None)
    y = np.clip(ry.x[:m], 0, None)
    return float(rx.x[-1]), x / x.sum(), y / y.sum()


def _double_oracle(cset: CandidateSet, loss: LossFunction, opts: GameOptions) -> GameSolution:
    K = len(cset)
    nature = [int(np.argmax(cset.phi))]
    if int(np.argmin(cset.phi)) not in nature:
        nature.append(int(np.argmin(cset.phi)))
    first = bayes_estimator(Prior.from_array(_extend(np.ones(len(nature)), nature, K)), cset, loss)
    pure = [first.values.copy()]
    risks = [risk_vector(first, cset, loss)]  # full risk vector per pure estimator
    upper = lower = math.nan
    trajectory = []
    status = "max_iter"
    it = 0
    for it in range(1, opts.do_max_iters + 1):
        R = np.array(risks)
        value, x, y = solve_matrix_game(R[:, nature])
        prior = _extend(y, nature, K)
        br = bayes_estimator(Prior.from_array(prior), cset, loss)
        br_risk = risk_vector(br, cset, loss)
        lower = float(prior @ br_risk)
        mixed_risk = x @ R
        k_star = int(np.argmax(mixed_risk))
        upper = float(mixed_risk[k_star])
        trajectory.append((value, lower, upper))
        added = False
        if upper > value + opts.do_tol and k_star not in nature:
            nature.append(k_star)
            added = True
        if lower < value - opts.do_tol and not any(np.array_equal(br.values, p) for p in pure):
            pure.append(br.values.copy())
            risks.append(br_risk)
            added = True
        if upper - lower <= 2 * opts.do_tol:
            status = "converged"
            break
        if not added:
            status = "converged" if upper - lower <= opts.gap_tol else "stalled"
            break
    R = np.array(risks)
    value, x, y = solve_matrix_game(R[:, nature])
    prior = Prior.from_array(_extend(y, nature, K))
    br = bayes_estimator(prior, cset, loss)
    lower = float(prior.array @ risk_vector(br, cset, loss))
    keep = x > 0
    pure_kept = [pure[i] for i in np.nonzero(keep)[0]]
    weights = x[keep] / x[keep].sum()
    estimators = [Estimator(cset.alphabet, values=v) for v in pure_kept]
    mixed = Estimator.mixture(estimators, weights)
    upper, _ = worst_case_error(mixed, cset, loss)
    return GameSolution(mixed, prior, upper, lower, max(upper - lower, 0.0), it, status,
                        trajectory, estimators, weights.tolist())


def _extend(y: np.ndarray, support: Sequence[int], K: int) -> np.ndarray:
    out = np.zeros(K)
    out[list(support)] = y
    return out / out.sum()


# --- the minimax estimator ---------------------------------------------------------

def minimax_estimator(cset: CandidateSet, loss: Optional[LossFunction] = None,
                      opts: Optional[GameOptions] = None) -> GameSolution:
    """Solve inf_theta max_k risk(theta, k) with a duality certificate."""
    loss = loss or LossFunction.squared()
    opts = opts or GameOptions()
    if len(cset) == 0:
        raise EmptyCandidates("no candidates")
    if loss.kind != "squared":
        return _double_oracle(cset, loss, opts)
    pi, _, iters, trajectory = _ascent(cset, opts)
    prior = Prior.from_array(pi)
    theta = bayes_estimator(prior, cset, loss, version="likelihood_mean")
    minimax_value, _ = worst_case_error(theta, cset, loss)
    maximin_value = averaged_risk(theta, prior, cset, loss)
    gap = minimax_value - maximin_value
    status = "converged" if gap <= opts.gap_tol else "best_found"
    if status != "converged":
        log.warning("duality gap %.3g above tolerance %.3g", gap, opts.gap_tol)
    return GameSolution(theta, prior, minimax_value, maximin_value, gap, iters, status, trajectory)


# --- experiments and mixtures ----------------------------------------------------------

@dataclass(frozen=True)
class ExperimentComparison:
    verdict: str  # "FirstPreferable" | "SecondPreferable" | "Equivalent"
    first_value: float
    second_value: float


def compare_experiments(map1: DataMap, map2: DataMap, candidates: Sequence, qoi, loss: Optional[LossFunction] = None,
                        opts: Optional[GameOptions] = None, tol: float = 1e-9) -> ExperimentComparison:
    """Order two data maps by their minimax values (smaller is preferable)."""
    v1 = minimax_estimator(CandidateSet.build(candidates, qoi, map1), loss, opts).minimax_value
    v2 = minimax_estimator(CandidateSet.build(candidates, qoi, map2), loss, opts).minimax_value
    if abs(v1 - v2) <= tol:
        verdict = "Equivalent"
    elif v1 < v2:
        verdict = "FirstPreferable"
    else:
        verdict = "SecondPreferable"
    return ExperimentComparison(verdict, v1, v2)


@dataclass(frozen=True)
class MixResult:
    alpha: tuple[float, ...]
    value: float
    vertex_values: tuple[float, ...]


def mix_estimators(thetas: Sequence[Estimator], cset: CandidateSet, loss: Optional[LossFunction] = None,
                   opts: Optional[GameOptions] = None) -> MixResult:
    """Convex weights alpha minimising the worst-case risk of sum alpha_i theta_i.

    Projected subgradient descent on the simplex, started from the best
    single estimator and keeping the best iterate.
    """
    loss = loss or LossFunction.squared()
    opts = opts or GameOptions()
    if not loss.is_convex:
        raise NonConvexLoss("estimator mixing needs a convex loss")
    if not thetas:
        raise ValueError("need at least one estimator")
    T = np.array([t.mean_values() if t.is_randomized else t.values for t in thetas])
    L, phi = cset.likelihood, cset.phi

    def risks(a):
        est = a @ T
        return np.einsum("kd,kd->k", L, (est[None, :] - phi[:, None]) ** 2)

    n = T.shape[0]
    vertex_values = [float(risks(np.eye(n)[i]).max()) for i in range(n)]
    alpha = np.eye(n)[int(np.argmin(vertex_values))]
    best_alpha, best_val = alpha.copy(), min(vertex_values)
    scale = max(best_val, 1e-12)
    for t in range(1, opts.mix_iters + 1):
        r = risks(alpha)
        k = int(np.argmax(r))
        est = alpha @ T
        g = 2.0 * T @ (L[k] * (est - phi[k]))
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        # Polyak-style step with a diminishing floor
        alpha = simplex_projection(alpha - (0.5 / math.sqrt(t)) * g / gn * min(1.0, scale / gn * 10))
        val = float(risks(alpha).max())
        if val < best_val:
            best_alpha, best_val = alpha.copy(), val
    mixed = Estimator(cset.alphabet, values=best_alpha @ T)
    value, _ = worst_case_error(mixed, cset, loss)
    return MixResult(tuple(best_alpha.tolist()), value, tuple(vertex_values))
