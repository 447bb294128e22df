"""Losses, data maps, candidate families and the risk of estimators.

A :class:`CandidateSet` is the finite hypothesis class of a decision
problem: every candidate carries its quantity of interest and its data law
on one shared alphabet, so the whole family is a likelihood matrix
``L[k, d]`` plus a vector ``phi[k]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AlphabetMismatch, AlphabetTooLarge, EmptyCandidates, LengthMismatch
from .measure import (
    DEFAULT_ALPHABET_CAP,
    DataDistribution,
    DiscreteMeasure,
    QuantityOfInterest,
    canonical,
    evaluate_qoi,
    multiset_distribution,
)

ROW_TOL = 1e-12


@dataclass(frozen=True)
class LossFunction:
    """Squared loss x**2, or the threshold loss 1{|x| >= gamma}."""

    kind: str = "squared"
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("squared", "threshold"):
            raise ValueError(f"unknown loss {self.kind!r}")
        if self.kind == "threshold" and not (self.gamma is not None and self.gamma > 0):
            raise ValueError("threshold loss needs gamma > 0")

    @classmethod
    def squared(cls) -> "LossFunction":
        return cls("squared")

    @classmethod
    def threshold(cls, gamma: float) -> "LossFunction":
        return cls("threshold", float(gamma))

    @property
    def is_convex(self) -> bool:
        return self.kind == "squared"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "squared":
            return x * x
        return (np.abs(x) >= self.gamma).astype(float)


@dataclass(frozen=True)
class DataMap:
    """Rule sending a candidate (mu, f) to the law of the observed data.

    kinds: ``iid`` (multiset of n samples of X), ``coarse`` (multiset of n
    samples of g(X)), ``response`` (multiset of n pairs (X, f(X))) and
    ``none`` (a single uninformative symbol).
    """

    kind: str = "iid"
    n: int = 1
    g: Optional[Callable] = None
    cap: int = DEFAULT_ALPHABET_CAP

    def __post_init__(self):
        if self.kind not in ("iid", "coarse", "response", "none"):
            raise ValueError(f"unknown data map {self.kind!r}")
        if self.kind != "none" and self.n < 1:
            raise ValueError("sample size must be positive")
        if self.kind == "coarse" and self.g is None:
            raise ValueError("coarse data map needs an observation function g")

    @classmethod
    def iid(cls, n: int, cap: int = DEFAULT_ALPHABET_CAP) -> "DataMap":
        return cls("iid", n, None, cap)

    @classmethod
    def coarse(cls, g: Callable, n: int = 1, cap: int = DEFAULT_ALPHABET_CAP) -> "DataMap":
        return cls("coarse", n, g, cap)

    @classmethod
    def response(cls, n: int, cap: int = DEFAULT_ALPHABET_CAP) -> "DataMap":
        return cls("response", n, None, cap)

    @classmethod
    def none(cls) -> "DataMap":
        return cls("none", 0)

    def labels(self, mu: DiscreteMeasure, f: Optional[Callable] = None) -> list:
        x = mu.points
        if self.kind == "iid":
            return [canonical(v) for v in x]
        if self.kind == "coarse":
            return [canonical(v) for v in np.atleast_1d(np.asarray(self.g(x), dtype=float))]
        if f is None:
            raise ValueError("response data map needs the candidate's response function")
        fx = np.atleast_1d(np.asarray(f(x), dtype=float))
        return [(canonical(a), canonical(b)) for a, b in zip(x, fx)]

    def distribution(self, mu: DiscreteMeasure, f: Optional[Callable] = None) -> DataDistribution:
        if self.kind == "none":
            return DataDistribution(((),), (1.0,))
        return multiset_distribution(self.labels(mu, f), mu.weights, self.n, self.cap)


@dataclass(frozen=True)
class Candidate:
    measure: Optional[DiscreteMeasure]
    function: Optional[Callable]
    phi_value: float
    data: DataDistribution


class CandidateSet:
    """Finite candidate family with a shared data alphabet."""

    def __init__(self, candidates: Sequence[Candidate], data_map: Optional[DataMap] = None):
        if not candidates:
            raise EmptyCandidates("candidate list is empty")
        alphabet = candidates[0].data.alphabet
        for c in candidates:
            if c.data.alphabet != alphabet:
                raise AlphabetMismatch("candidates do not share one data alphabet")
        self.candidates = tuple(candidates)
        self.alphabet = tuple(alphabet)
        self.data_map = data_map
        self.likelihood = np.array([c.data.probabilities for c in candidates], dtype=float)
        self.phi = np.array([c.phi_value for c in candidates], dtype=float)
        self.likelihood.setflags(write=False)
        self.phi.setflags(write=False)

    @classmethod
    def build(cls, items: Sequence, qoi: QuantityOfInterest, data_map: DataMap) -> "CandidateSet":
        """Candidates from measures or (measure, function) pairs."""
        rows = []
        for item in items:
            mu, f = item if isinstance(item, tuple) else (item, None)
            value = evaluate_qoi(qoi, mu, f=f)
            rows.append((mu, f, value, data_map.distribution(mu, f)))
        symbols = sorted(set().union(*(r[3].alphabet for r in rows)))
        if len(symbols) > data_map.cap:
            raise AlphabetTooLarge(f"shared alphabet of {len(symbols)} symbols exceeds cap {data_map.cap}")
        alphabet = tuple(symbols)
        cands = [Candidate(mu, f, value, DataDistribution(alphabet, tuple(dist.on(alphabet).tolist())))
                 for mu, f, value, dist in rows]
        return cls(cands, data_map)

    @classmethod
    def from_table(cls, phi_values: Sequence[float], likelihood, alphabet: Optional[Sequence] = None) -> "CandidateSet":
        """Abstract family given directly by Phi values and data laws."""
        lik = np.asarray(likelihood, dtype=float)
        if lik.ndim != 2 or lik.shape[0] != len(phi_values):
            raise LengthMismatch("likelihood rows must match the Phi values")
        alphabet = tuple(alphabet) if alphabet is not None else tuple(range(lik.shape[1]))
        cands = [Candidate(None, None, float(v), DataDistribution(alphabet, tuple(row.tolist())))
                 for v, row in zip(phi_values, lik)]
        return cls(cands)

    def __len__(self) -> int:
        return len(self.candidates)

    def __getitem__(self, i) -> Candidate:
        return self.candidates[i]

    @property
    def phi_range(self) -> tuple[float, float]:
        return float(self.phi.min()), float(self.phi.max())

    def subset(self, idx: Sequence[int]) -> "CandidateSet":
        return CandidateSet([self.candidates[i] for i in idx], self.data_map)


class Estimator:
    """Deterministic table d -> value, or a row-stochastic kernel d -> decisions."""

    def __init__(self, alphabet: Sequence, values=None, kernel=None, decisions=None):
        self.alphabet = tuple(alphabet)
        if (values is None) == (kernel is None):
            raise ValueError("give exactly one of values or kernel")
        if values is not None:
            values = np.asarray(values, dtype=float).copy()
            if values.shape != (len(self.alphabet),) or not np.all(np.isfinite(values)):
                raise ValueError("values must be finite, one per symbol")
            values.setflags(write=False)
            self.values, self.kernel, self.decisions = values, None, None
        else:
            kernel = np.asarray(kernel, dtype=float).copy()
            decisions = np.asarray(decisions, dtype=float).copy()
            if kernel.shape != (len(self.alphabet), decisions.size):
                raise ValueError("kernel must be alphabet x decisions")
            if np.any(kernel < -ROW_TOL) or np.any(np.abs(kernel.sum(axis=1) - 1) > ROW_TOL):
                raise ValueError("kernel rows must be probability vectors")
            if not np.all(np.isfinite(decisions)):
                raise ValueError("decisions must be finite")
            kernel.setflags(write=False)
            decisions.setflags(write=False)
            self.values, self.kernel, self.decisions = None, kernel, decisions

    @classmethod
    def constant(cls, alphabet: Sequence, c: float) -> "Estimator":
        return cls(alphabet, values=np.full(len(tuple(alphabet)), float(c)))

    @classmethod
    def from_function(cls, alphabet: Sequence, fn: Callable) -> "Estimator":
        return cls(alphabet, values=[fn(s) for s in alphabet])

    @classmethod
    def mixture(cls, estimators: Sequence["Estimator"], weights: Sequence[float]) -> "Estimator":
        """Randomized estimator choosing deterministic estimator i with probability weights[i]."""
        alphabet = estimators[0].alphabet
        decisions = sorted({float(v) for e in estimators for v in e.values})
        index = {v: j for j, v in enumerate(decisions)}
        kernel = np.zeros((len(alphabet), len(decisions)))
        for e, w in zip(estimators, weights):
            for d, v in enumerate(e.values):
                kernel[d, index[float(v)]] += w
        kernel /= kernel.sum(axis=1, keepdims=True)
        return cls(alphabet, kernel=kernel, decisions=decisions)

    @property
    def is_randomized(self) -> bool:
        return self.kernel is not None

    @property
    def is_point_mass(self) -> bool:
        """True when every kernel row is a single decision (or deterministic)."""
        if self.kernel is None:
            return True
        return bool(np.all(np.isclose(self.kernel.max(axis=1), 1.0, atol=ROW_TOL)))

    def mean_values(self) -> np.ndarray:
        if self.kernel is None:
            return np.asarray(self.values)
        return self.kernel @ self.decisions

    def __repr__(self) -> str:
        kind = "randomized" if self.is_randomized else "deterministic"
        return f"Estimator({kind}, |alphabet|={len(self.alphabet)})"


@dataclass(frozen=True)
class Prior:
    """Convex weights over a candidate list."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = [float(x) for x in self.weights]
        if not w or any((not math.isfinite(x)) or x < 0 for x in w):
            raise ValueError("prior weights must be nonnegative and finite")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("prior weights must sum to 1")
        object.__setattr__(self, "weights", tuple(w))

    @classmethod
    def from_array(cls, w) -> "Prior":
        w = np.clip(np.asarray(w, dtype=float), 0.0, None)
        w = w / w.sum()
        w[int(np.argmax(w))] += 1.0 - math.fsum(w.tolist())
        return cls(tuple(w.tolist()))

    @classmethod
    def uniform(cls, k: int) -> "Prior":
        return cls.from_array(np.full(k, 1.0 / k))

    @classmethod
    def point(cls, k: int, index: int) -> "Prior":
        w = np.zeros(k)
        w[index] = 1.0
        return cls(tuple(w.tolist()))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.weights)

    def __len__(self) -> int:
        return len(self.weights)


def _check_alphabet(theta: Estimator, alphabet: Sequence) -> None:
    if tuple(theta.alphabet) != tuple(alphabet):
        raise AlphabetMismatch("estimator and data distribution use different alphabets")


def loss_table(theta: Estimator, phi_value: float, loss: LossFunction) -> np.ndarray:
    """Expected loss per data symbol for one true value of Phi."""
    if theta.kernel is None:
        return loss(theta.values - phi_value)
    return theta.kernel @ loss(theta.decisions - phi_value)


def statistical_error(theta: Estimator, cand: Candidate, loss: LossFunction) -> float:
    """E_{d ~ D(cand)} V(theta(d) - Phi(cand)), summed exactly over the alphabet."""
    _check_alphabet(theta, cand.data.alphabet)
    per_symbol = loss_table(theta, cand.phi_value, loss)
    p = np.asarray(cand.data.probabilities)
    order = np.argsort(-p, kind="stable")
    return math.fsum((p[order] * per_symbol[order]).tolist())


def risk_vector(theta: Estimator, cset: CandidateSet, loss: LossFunction) -> np.ndarray:
    """Statistical error of theta for every candidate (vectorised)."""
    _check_alphabet(theta, cset.alphabet)
    if theta.kernel is None:
        table = loss(theta.values[None, :] - cset.phi[:, None])
    else:
        table = np.stack([theta.kernel @ loss(theta.decisions - v) for v in cset.phi])
    return np.einsum("kd,kd->k", cset.likelihood, table)


def _as_candidates(candidates) -> Sequence[Candidate]:
    return candidates.candidates if isinstance(candidates, CandidateSet) else tuple(candidates)


def worst_case_error(theta: Estimator, candidates, loss: LossFunction) -> tuple[float, int]:
    """Max statistical error over the candidates and the first maximiser."""
    cands = _as_candidates(candidates)
    if not cands:
        raise EmptyCandidates("no candidates")
    risks = [statistical_error(theta, c, loss) for c in cands]
    idx = int(np.argmax(risks))
    return risks[idx], idx


@dataclass(frozen=True)
class BiasVariance:
    variance: float
    bias: float
    mse: float


def bias_variance(theta: Estimator, cand: Candidate) -> BiasVariance:
    """Variance and bias of theta(D) for D ~ D(cand); mse is the squared-loss risk."""
    _check_alphabet(theta, cand.data.alphabet)
    p = np.asarray(cand.data.probabilities)
    if theta.kernel is None:
        probs = p
        vals = np.asarray(theta.values)
    else:
        probs = (p[:, None] * theta.kernel).ravel()
        vals = np.broadcast_to(theta.decisions, theta.kernel.shape).ravel()
    mean = math.fsum((probs * vals).tolist())
    variance = math.fsum((probs * (vals - mean) ** 2).tolist())
    mse = statistical_error(theta, cand, LossFunction.squared())
    return BiasVariance(variance, mean - cand.phi_value, mse)


def averaged_risk(theta: Estimator, prior: Prior, candidates, loss: LossFunction) -> float:
    """Prior-weighted statistical error (linear in the prior)."""
    cands = _as_candidates(candidates)
    if len(prior) != len(cands):
        raise LengthMismatch(f"prior has {len(prior)} weights for {len(cands)} candidates")
    return math.fsum(w * statistical_error(theta, c, loss) for w, c in zip(prior.weights, cands) if w > 0)
