"""Optimal bounds U(A) = sup Phi and L(A) = inf Phi over an admissible set.

The search runs over the reduced Dirac parametrization: k atom positions,
k weights on the simplex and, with a function band, k response values.
For quantities linear in the weights (tail probabilities, expectations)
the weights for fixed positions are an exact small linear program, so the
derivative-free multistart search only moves positions and response
values.  Other quantities use a penalised coordinate search on all
variables with simplex projection and a final feasibility repair.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog

from .admissible import FEAS_TOL, AdmissibleSet, MomentConstraint, is_feasible, reduced_parametrization
from .errors import DomainError, InfeasibleSet, NumericalFailure, UndefinedAtSupport
from .measure import (
    DiscreteMeasure,
    QuantityOfInterest,
    TabulatedFunction,
    canonical,
    evaluate_qoi,
    make_measure,
)


@dataclass(frozen=True)
class SolverOptions:
    restarts: int = 32
    max_iters: int = 10_000
    tol: float = 1e-9
    stall_iters: int = 50
    seed: int = 0
    threads: int = 1
    n_atoms: Optional[int] = None
    min_step: float = 1e-10


@dataclass
class SolverTrace:
    iterations: int
    restarts: int
    best_per_restart: list[float]
    best_restart: int
    exchange_rounds: int = 0


@dataclass
class BoundResult:
    value: float
    extremizer: DiscreteMeasure
    function: Optional[TabulatedFunction]
    function_values: Optional[tuple[float, ...]]
    solver_trace: SolverTrace
    status: str
    sense: str


def simplex_projection(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (1.0 - css) / idx > 0)[0][-1]
    lam = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + lam, 0.0)


@lru_cache(maxsize=256)
def _combos(m: int, r: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(m), r)), dtype=int).reshape(-1, r)


_VERTEX_LIMIT = 20_000


def simplex_lp(c: np.ndarray, A: np.ndarray, b: np.ndarray, tol: float = 1e-12):
    """Maximise c.w over {w >= 0, sum w = 1, A w <= b}.

    Small instances are solved exactly by enumerating basic solutions, so the
    optimum is a vertex with at most rank(A) + 1 nonzero weights.  Returns
    ``(value, w)`` or ``None`` when infeasible.
    """
    k = c.size
    if k == 2:
        return _segment_lp(c, A, b, tol)
    G = np.vstack([A, -np.eye(k)]) if A.size else -np.eye(k)
    h = np.concatenate([b, np.zeros(k)]) if A.size else np.zeros(k)
    m = G.shape[0]
    if k == 1:
        w = np.ones(1)
        return (float(c[0]), w) if np.all(G @ w <= h + tol * (1 + np.abs(h))) else None
    if math.comb(m, k - 1) > _VERTEX_LIMIT:
        res = linprog(-c, A_ub=A if A.size else None, b_ub=b if A.size else None,
                      A_eq=np.ones((1, k)), b_eq=[1.0], bounds=(0, None), method="highs-ds")
        if res.status != 0:
            return None
        w = np.clip(res.x, 0, None)
        w /= w.sum()
        return float(c @ w), w
    combos = _combos(m, k - 1)
    M = np.empty((combos.shape[0], k, k))
    M[:, 0, :] = 1.0
    M[:, 1:, :] = G[combos]
    rhs = np.empty((combos.shape[0], k))
    rhs[:, 0] = 1.0
    rhs[:, 1:] = h[combos]
    det = np.linalg.det(M)
    ok = np.abs(det) > 1e-13
    if not np.any(ok):
        return None
    W = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    slack = h[None, :] + tol * (1 + np.abs(h))[None, :] - W @ G.T
    feas = np.all(slack >= 0, axis=1)
    if not np.any(feas):
        return None
    W = W[feas]
    vals = W @ c
    best = int(np.argmax(vals))
    w = np.clip(W[best], 0.0, None)
    w /= w.sum()
    return float(c @ w), w


def _segment_lp(c, A, b, tol):
    """Two atoms: w = (t, 1 - t), so the LP is one-dimensional in t."""
    t_lo, t_hi = 0.0, 1.0
    for row, rhs in zip(A.tolist(), b.tolist()):
        slope = row[0] - row[1]
        room = rhs - row[1]
        if slope > 0:
            t_hi = min(t_hi, room / slope)
        elif slope < 0:
            t_lo = max(t_lo, room / slope)
        elif room < -tol * (1 + abs(rhs)):
            return None
    if t_lo > t_hi + tol:
        return None
    if t_lo > t_hi:
        t_lo = t_hi = 0.5 * (t_lo + t_hi)
    t = t_hi if c[0] > c[1] else t_lo
    t = min(max(t, 0.0), 1.0)
    w = np.array([t, 1.0 - t])
    return float(c[0] * t + c[1] * (1.0 - t)), w


def _min_violation(A: np.ndarray, b: np.ndarray, k: int) -> float:
    """Smallest achievable max-violation of A w <= b over the simplex."""
    if A.size == 0:
        return 0.0
    # variables (w, t): minimise t s.t. A w - t <= b
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    A_ub = np.hstack([A, -np.ones((A.shape[0], 1))])
    A_eq = np.zeros((1, k + 1))
    A_eq[0, :k] = 1.0
    res = linprog(cost, A_ub=A_ub, b_ub=b, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * k + [(0, None)], method="highs")
    if res.status != 0:
        raise NumericalFailure(f"phase-1 LP failed: {res.message}")
    return float(res.x[-1])


class _AtomFunction:
    """Response function known at the atoms, falling back to the band center."""

    def __init__(self, points, values, center):
        self.table = {canonical(x): float(v) for x, v in zip(points, values)}
        self.center = center

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([self.table.get(canonical(v), np.nan) for v in xs])
        miss = np.isnan(out)
        if np.any(miss):
            out[miss] = np.asarray(self.center(xs[miss]), dtype=float)
        return float(out[0]) if scalar else out


class _Problem:
    """Reduced finite-dimensional problem for one bound computation."""

    def __init__(self, a_set: AdmissibleSet, phi: QuantityOfInterest, sense: int, k: int):
        self.a_set = a_set
        self.phi = phi
        self.sense = sense
        self.k = k
        self.lo, self.hi = a_set.domain.lo, a_set.domain.hi
        self.width = max(self.hi - self.lo, 1e-300)
        self.band = a_set.function_band
        self.linear = phi.is_linear
        self.special = self._special_points()

    # --- geometry -----------------------------------------------------
    def _special_points(self) -> list[float]:
        pts = {self.lo, self.hi}
        if self.phi.kind == "tail_probability":
            a = self.phi.threshold
            grid = np.array(self.a_set.grid)
            funcs = []
            if self.band is not None:
                funcs = [lambda x: self.band.center(x) + self.band.half_width,
                         lambda x: self.band.center(x) - self.band.half_width,
                         self.band.center]
            elif self.phi.f is not None:
                funcs = [self.phi.f]
            for fn in funcs:
                try:
                    vals = np.asarray(fn(grid), dtype=float) - a
                except UndefinedAtSupport:
                    continue
                for i in range(grid.size):
                    if abs(vals[i]) <= 1e-12:
                        pts.add(float(grid[i]))
                for i in range(grid.size - 1):
                    if vals[i] * vals[i + 1] < 0:
                        t = vals[i] / (vals[i] - vals[i + 1])
                        x = grid[i] + t * (grid[i + 1] - grid[i])
                        # the crossing itself, pushed to the side where f >= a
                        for cand in (x, np.nextafter(x, grid[i]), np.nextafter(x, grid[i + 1])):
                            if try_tail(fn, float(cand), a):
                                pts.add(float(cand))
                                break
                        pts.update((float(grid[i]), float(grid[i + 1])))
        return sorted(p for p in pts if self.lo <= p <= self.hi)

    def f_values(self, x: np.ndarray, u: Optional[np.ndarray]) -> Optional[np.ndarray]:
        if self.band is not None:
            return np.asarray(self.band.center(x), dtype=float) + self.band.half_width * u
        if self.phi.f is not None:
            return np.atleast_1d(np.asarray(self.phi.f(x), dtype=float))
        return None

    def favorable_u(self, n: int) -> np.ndarray:
        # tail indicators and expectations both increase with f
        return np.full(n, 1.0 if self.sense > 0 else -1.0)

    # --- inner problem --------------------------------------------------
    def solve_weights(self, x: np.ndarray, u: Optional[np.ndarray]):
        """Best weights for fixed positions: (feasible, score, w)."""
        A, b = self.a_set.constraint_matrix(x)
        c = self.sense * self.phi.atom_values(x, f_values=self.f_values(x, u))
        sol = simplex_lp(c, A, b)
        if sol is None:
            return False, -_min_violation(A, b, x.size), None
        return True, sol[0], sol[1]

    def measure(self, x, w):
        return make_measure(x, w, self.a_set.domain)

    def value_of(self, x, w, u) -> float:
        mu = self.measure(x, w)
        f = self.response(x, u)
        return evaluate_qoi(self.phi, mu, f=f)

    def response(self, x, u):
        if self.band is None:
            return None
        return _AtomFunction(x, self.f_values(x, u), self.band.center)


def try_tail(fn, x, a):
    try:
        return float(fn(x)) >= a - 1e-12
    except UndefinedAtSupport:
        return False


def _grid_seed(prob: _Problem):
    """Positions from the basic optimum of the LP over all grid points."""
    pts = np.array(sorted(set(prob.a_set.grid) | set(prob.special)))
    u = prob.favorable_u(pts.size) if prob.band is not None else None
    A, b = prob.a_set.constraint_matrix(pts)
    c = prob.sense * prob.phi.atom_values(pts, f_values=prob.f_values(pts, u))
    res = linprog(-c, A_ub=A if A.size else None, b_ub=b if A.size else None,
                  A_eq=np.ones((1, pts.size)), b_eq=[1.0], bounds=(0, None), method="highs-ds")
    if res.status != 0:
        return None
    support = pts[res.x > 1e-12]
    return list(support[: prob.k])


def _pad(points: list[float], k: int, extra: list[float], rng) -> np.ndarray:
    out = list(points)
    for p in extra:
        if len(out) >= k:
            break
        if all(abs(p - q) > 1e-12 for q in out):
            out.append(p)
    while len(out) < k:
        out.append(float(rng.uniform(extra[0], extra[-1])))
    return np.array(out[:k], dtype=float)


@dataclass
class _RestartResult:
    score: float
    feasible: bool
    x: np.ndarray
    u: Optional[np.ndarray]
    w: Optional[np.ndarray]
    iterations: int
    converged: bool


def _pattern_search_linear(prob: _Problem, x0: np.ndarray, u0: Optional[np.ndarray],
                           opts: SolverOptions) -> _RestartResult:
    k = prob.k
    has_u = u0 is not None
    z = np.concatenate([x0, u0]) if has_u else x0.copy()
    lower = np.concatenate([np.full(k, prob.lo), -np.ones(k)]) if has_u else np.full(k, prob.lo)
    upper = np.concatenate([np.full(k, prob.hi), np.ones(k)]) if has_u else np.full(k, prob.hi)
    steps = np.concatenate([np.full(k, 0.25 * prob.width), np.full(k, 0.5)]) if has_u \
        else np.full(k, 0.25 * prob.width)
    min_steps = np.concatenate([np.full(k, opts.min_step * prob.width), np.full(k, opts.min_step)]) \
        if has_u else np.full(k, opts.min_step * prob.width)

    def evaluate(zz):
        x = zz[:k]
        u = zz[k:] if has_u else None
        return prob.solve_weights(x, u)

    feas, score, w = evaluate(z)
    key = (feas, score)
    it = 0
    last_gain_it = 0
    best_at_mark = score
    converged = False
    while it < opts.max_iters:
        it += 1
        improved = False
        for i in range(z.size):
            for d in (1.0, -1.0):
                trial = z.copy()
                trial[i] = min(max(trial[i] + d * steps[i], lower[i]), upper[i])
                if trial[i] == z[i]:
                    continue
                tf, ts, tw = evaluate(trial)
                if (tf, ts) > (key[0], key[1] + 1e-15):
                    z, key, w = trial, (tf, ts), tw
                    improved = True
                    break
        if key[0] and key[1] > best_at_mark + opts.tol:
            best_at_mark = key[1]
            last_gain_it = it
        if not improved:
            steps *= 0.5
            if np.all(steps < min_steps):
                converged = True
                break
        if key[0] and it - last_gain_it >= opts.stall_iters and np.all(steps < 1e-6 * np.maximum(1, prob.width)):
            converged = True
            break
    x = z[:k]
    u = z[k:] if has_u else None
    return _RestartResult(key[1], key[0], x, u, w, it, converged)


def _exchange(prob: _Problem, res: _RestartResult, opts: SolverOptions) -> tuple[_RestartResult, int]:
    """Column-generation polish: insert a grid point, keep the basic optimum."""
    pts = sorted(set(prob.a_set.grid) | set(prob.special))
    rounds = 0
    for _ in range(20):
        best = None
        for p in pts:
            if np.any(np.abs(res.x - p) <= 1e-12):
                continue
            x = np.append(res.x, p)
            u = None
            if res.u is not None:
                u = np.append(res.u, prob.favorable_u(1))
            feas, score, w = prob.solve_weights(x, u)
            if feas and score > res.score + 1e-12 and (best is None or score > best[0]):
                best = (score, x, u, w)
        if best is None:
            break
        rounds += 1
        score, x, u, w = best
        keep = np.argsort(-w, kind="stable")[: prob.k]
        keep.sort()
        x2 = x[keep]
        u2 = u[keep] if u is not None else None
        polished = _pattern_search_linear(prob, x2, u2, opts)
        if not polished.feasible or polished.score < score - 1e-12:
            feas2, s2, w2 = prob.solve_weights(x2, u2)
            polished = _RestartResult(s2, feas2, x2, u2, w2, 0, True)
        if polished.score <= res.score + 1e-12:
            break
        polished.iterations += res.iterations
        res = polished
    return res, rounds


# --- nonlinear (custom) quantities --------------------------------------------

def _pattern_search_penalty(prob: _Problem, x0, u0, w0, opts: SolverOptions) -> _RestartResult:
    k = prob.k
    has_u = u0 is not None
    a_set = prob.a_set

    def unpack(z):
        x = z[:k]
        w = simplex_projection(z[k:2 * k])
        u = z[2 * k:] if has_u else None
        return x, w, u

    def raw_value(z):
        x, w, u = unpack(z)
        mu_val = prob.phi.fn(_WeightedAtoms(x, w, a_set.domain), prob.response(x, u))
        A, b = a_set.constraint_matrix(x)
        viol = np.maximum(A @ w - b, 0.0) if A.size else np.zeros(0)
        return prob.sense * float(mu_val), float(np.sum(viol ** 2)), float(viol.max(initial=0.0))

    rho = 10.0
    z = np.concatenate([x0, w0] + ([u0] if has_u else []))
    lower = np.concatenate([np.full(k, prob.lo), np.zeros(k)] + ([-np.ones(k)] if has_u else []))
    upper = np.concatenate([np.full(k, prob.hi), np.ones(k)] + ([np.ones(k)] if has_u else []))
    steps = np.concatenate([np.full(k, 0.25 * prob.width), np.full(k, 0.25)] + ([np.full(k, 0.5)] if has_u else []))
    min_step = opts.min_step * max(prob.width, 1.0)

    def penalised(zz):
        v, pen, _ = raw_value(zz)
        return v - rho * pen

    cur = penalised(z)
    it = 0
    converged = False
    while it < opts.max_iters:
        it += 1
        improved = False
        for i in range(z.size):
            for d in (1.0, -1.0):
                trial = z.copy()
                trial[i] = min(max(trial[i] + d * steps[i], lower[i]), upper[i])
                trial[k:2 * k] = simplex_projection(trial[k:2 * k])
                if np.array_equal(trial, z):
                    continue
                val = penalised(trial)
                if val > cur + 1e-15:
                    z, cur, improved = trial, val, True
                    break
        if not improved:
            steps *= 0.5
            rho = min(rho * 2.0, 1e12)
            cur = penalised(z)
            if np.all(steps < min_step):
                converged = True
                break
    x, w, u = unpack(z)
    w = _repair(prob, x, w)
    if w is None:
        return _RestartResult(-math.inf, False, x, u, None, it, converged)
    v, _, _ = raw_value(np.concatenate([x, w] + ([u] if has_u else [])))
    return _RestartResult(v, True, x, u, w, it, converged)


class _WeightedAtoms(DiscreteMeasure):
    """Lightweight measure view used inside the penalised search (no dedup)."""

    def __init__(self, x, w, domain):
        object.__setattr__(self, "support", tuple(float(v) for v in x))
        object.__setattr__(self, "weights", tuple(float(v) for v in w))
        object.__setattr__(self, "domain", domain)


def _repair(prob: _Problem, x: np.ndarray, w: np.ndarray) -> Optional[np.ndarray]:
    """Nearest (L1) feasible weights on the same atoms, or None."""
    A, b = prob.a_set.constraint_matrix(x)
    if A.size == 0 or np.all(A @ w <= b + FEAS_TOL / 10):
        return w
    k = x.size
    # variables (w, s) with |w - w0| <= s
    cost = np.concatenate([np.zeros(k), np.ones(k)])
    A_ub = np.vstack([
        np.hstack([A, np.zeros_like(A)]),
        np.hstack([np.eye(k), -np.eye(k)]),
        np.hstack([-np.eye(k), -np.eye(k)]),
    ])
    b_ub = np.concatenate([b, w, -w])
    A_eq = np.concatenate([np.ones(k), np.zeros(k)])[None, :]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    w2 = np.clip(res.x[:k], 0.0, None)
    return w2 / w2.sum()


# --- driver -------------------------------------------------------------------

def _run_restart(prob: _Problem, r: int, rng: np.random.Generator, grid_seed, opts: SolverOptions):
    k = prob.k
    if r == 0 and grid_seed is not None:
        x0 = _pad(grid_seed, k, prob.special, rng)
    elif r == 1:
        x0 = _pad([], k, prob.special, rng)
    else:
        x0 = np.sort(rng.uniform(prob.lo, prob.hi, size=k))
    u0 = None
    if prob.band is not None:
        u0 = prob.favorable_u(k) if r <= 1 else rng.uniform(-1, 1, size=k)
    if prob.linear:
        return _pattern_search_linear(prob, x0, u0, opts)
    w0 = np.full(k, 1.0 / k) if r <= 1 else rng.dirichlet(np.ones(k))
    return _pattern_search_penalty(prob, x0, u0, w0, opts)


def _optimize(a_set: AdmissibleSet, phi: QuantityOfInterest, sense: int,
              opts: Optional[SolverOptions]) -> BoundResult:
    opts = opts or SolverOptions()
    if not a_set.probe():
        raise InfeasibleSet("no measure satisfies the moment constraints")
    k = opts.n_atoms or reduced_parametrization(a_set).n_atoms
    prob = _Problem(a_set, phi, sense, k)
    grid_seed = _grid_seed(prob) if prob.linear else None
    seeds = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    rngs = [np.random.default_rng(s) for s in seeds]

    def task(r):
        return _run_restart(prob, r, rngs[r], grid_seed, opts)

    if opts.threads > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            results = list(pool.map(task, range(opts.restarts)))
    else:
        results = [task(r) for r in range(opts.restarts)]

    best_idx = None
    for i, res in enumerate(results):
        if not res.feasible:
            continue
        if best_idx is None or res.score > results[best_idx].score + 1e-15:
            best_idx = i
    if best_idx is None:
        raise NumericalFailure("no restart reached a feasible point")
    best = results[best_idx]
    rounds = 0
    if prob.linear:
        best, rounds = _exchange(prob, best, opts)
    mu, f, fvals = _finalize(prob, best)
    report = is_feasible(mu, f, a_set)
    if not report:
        raise NumericalFailure(f"extremizer violates constraints by {report.max_violation:.3g}")
    value = evaluate_qoi(phi, mu, f=f)
    trace = SolverTrace(
        iterations=sum(r.iterations for r in results),
        restarts=opts.restarts,
        best_per_restart=[sense * r.score if r.feasible else math.nan for r in results],
        best_restart=best_idx,
        exchange_rounds=rounds,
    )
    return BoundResult(value, mu, f, fvals, trace, "converged" if best.converged else "max_iter",
                       "sup" if sense > 0 else "inf")


def _finalize(prob: _Problem, res: _RestartResult):
    x, w, u = res.x, res.w, res.u
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    u = u[order] if u is not None else None
    # merge coincident atoms (the first response value wins for a band)
    keys = [canonical(v) for v in x]
    _, first = np.unique(keys, return_index=True)
    if first.size < x.size:
        x = x[first]
        u = u[first] if u is not None else None
        if prob.linear:
            _, _, w = prob.solve_weights(x, u)
        else:
            w = _repair(prob, x, np.full(x.size, 1.0 / x.size))
    mu = prob.measure(x, w)
    if prob.band is None:
        return mu, None, None
    vals = prob.f_values(x, u)
    table = dict(zip((canonical(v) for v in x), vals))
    grid = np.array(prob.a_set.grid)
    xs = sorted(set(grid.tolist()) | set(table))
    center = np.asarray(prob.band.center(np.array(xs)), dtype=float)
    ys = [table.get(canonical(v), c) for v, c in zip(xs, center)]
    f = TabulatedFunction(xs, ys, interpolation="exact")
    fvals = tuple(float(table[canonical(v)]) for v in mu.support)
    return mu, f, fvals


def upper_bound(a_set: AdmissibleSet, phi: QuantityOfInterest, opts: Optional[SolverOptions] = None) -> BoundResult:
    """Best-found sup of phi over the admissible set (a feasible witness attains it)."""
    return _optimize(a_set, phi, +1, opts)


def lower_bound(a_set: AdmissibleSet, phi: QuantityOfInterest, opts: Optional[SolverOptions] = None) -> BoundResult:
    """Best-found inf of phi over the admissible set."""
    return _optimize(a_set, phi, -1, opts)


@dataclass(frozen=True)
class Certification:
    verdict: str  # "Safe" | "Unsafe" | "Undecided"
    lower: float
    upper: float
    epsilon: float


def certify(a_set: AdmissibleSet, phi: QuantityOfInterest, epsilon: float,
            opts: Optional[SolverOptions] = None) -> Certification:
    """Safe if even the worst case meets epsilon, Unsafe if even the best case fails."""
    if phi.kind != "tail_probability":
        raise ValueError("certification needs a tail-probability quantity")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    lo = lower_bound(a_set, phi, opts).value
    hi = upper_bound(a_set, phi, opts).value
    return Certification(classify(lo, hi, epsilon), lo, hi, epsilon)


def classify(lower: float, upper: float, epsilon: float) -> str:
    if upper <= epsilon:
        return "Safe"
    if lower > epsilon:
        return "Unsafe"
    return "Undecided"


def markov_oracle(m: float, a: float) -> float:
    """Closed-form sup of mu[X >= a] over measures on [0, 1] with mean <= m."""
    if not (0.0 < m < a <= 1.0):
        raise DomainError(f"need 0 < m < a <= 1, got m={m}, a={a}")
    return min(1.0, m / a)


def problem1_set(m: float, grid=None, relation: str = "<=") -> AdmissibleSet:
    """Measures on [0, 1] with E[X] (relation) m."""
    grid = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid, dtype=float)
    ident = TabulatedFunction.identity(grid)
    return AdmissibleSet((0.0, 1.0), (MomentConstraint(ident, relation, m),), None, tuple(grid))
