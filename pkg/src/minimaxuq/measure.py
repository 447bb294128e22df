"""Finite discrete measures, tabulated functions, quantities of interest and
the data distributions induced by sampling.

All candidate measures are finite Dirac mixtures on a real interval.
Functions are tabulated on grids rather than given symbolically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional, Sequence

import numpy as np

from .errors import (
    AlphabetTooLarge,
    NegativeWeight,
    PointOutsideDomain,
    UndefinedAtSupport,
    ZeroTotalMass,
)

CANON_DIGITS = 12
WEIGHT_TOL = 1e-12
# f(x) >= a is evaluated with this slack so that round-off at the threshold
# counts as attaining it (closed upper set).
TIE_TOL = 1e-12
DEFAULT_ALPHABET_CAP = 200_000


def canonical(x: float) -> float:
    """Round to the canonical 12 decimal digits used for atom identity."""
    return round(float(x), CANON_DIGITS) + 0.0


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise ValueError(f"empty or non-finite interval [{self.lo}, {self.hi}]")

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.lo - tol) & (x <= self.hi + tol)))

    @property
    def width(self) -> float:
        return self.hi - self.lo


def as_interval(domain) -> Interval:
    if isinstance(domain, Interval):
        return domain
    lo, hi = domain
    return Interval(float(lo), float(hi))


class TabulatedFunction:
    """A real function known only through its values on a grid.

    With ``interpolation="linear"`` the function is extended piecewise
    linearly between grid points (so a tabulated identity stays the identity);
    with ``"exact"`` only grid points may be queried.  Queries outside the
    tabulated hull raise :class:`UndefinedAtSupport` in both modes.
    """

    def __init__(self, xs: Sequence[float], ys: Sequence[float], interpolation: str = "linear"):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
            raise ValueError("xs and ys must be nonempty 1-d arrays of equal length")
        if interpolation not in ("linear", "exact"):
            raise ValueError(f"unknown interpolation {interpolation!r}")
        if not np.all(np.isfinite(ys)):
            raise ValueError("tabulated values must be finite")
        order = np.argsort(xs, kind="stable")
        xs, ys = xs[order], ys[order]
        if np.any(np.diff(xs) <= 0):
            raise ValueError("grid points must be distinct")
        xs.setflags(write=False)
        ys.setflags(write=False)
        self.xs = xs
        self.ys = ys
        self.interpolation = interpolation

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], grid: Sequence[float],
                      interpolation: str = "linear") -> "TabulatedFunction":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(fn(grid), dtype=float) * np.ones_like(grid), interpolation)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]], interpolation: str = "linear") -> "TabulatedFunction":
        pairs = [tuple(p) for p in pairs]
        return cls([p[0] for p in pairs], [p[1] for p in pairs], interpolation)

    @classmethod
    def identity(cls, grid: Sequence[float]) -> "TabulatedFunction":
        return cls.from_callable(lambda x: x, grid)

    @classmethod
    def constant(cls, value: float, grid: Sequence[float]) -> "TabulatedFunction":
        return cls.from_callable(lambda x: np.full_like(x, value), grid)

    def shifted(self, c: float) -> "TabulatedFunction":
        return TabulatedFunction(self.xs, self.ys + c, self.interpolation)

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.xs[0], self.xs[-1]
        if np.any(x < lo - 1e-12) | np.any(x > hi + 1e-12):
            bad = x[(x < lo - 1e-12) | (x > hi + 1e-12)]
            raise UndefinedAtSupport(f"function not tabulated at {bad.tolist()}")
        if self.interpolation == "linear":
            out = np.interp(x, self.xs, self.ys)
        else:
            idx = np.clip(np.searchsorted(self.xs, x), 0, self.xs.size - 1)
            idx_left = np.clip(idx - 1, 0, self.xs.size - 1)
            pick = np.where(np.abs(self.xs[idx_left] - x) < np.abs(self.xs[idx] - x), idx_left, idx)
            miss = np.abs(self.xs[pick] - x) > 10.0 ** (-CANON_DIGITS)
            if np.any(miss):
                raise UndefinedAtSupport(f"function not tabulated at {x[miss].tolist()}")
            out = self.ys[pick]
        return float(out[0]) if scalar else out

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def __repr__(self) -> str:
        return f"TabulatedFunction(n={self.xs.size}, interpolation={self.interpolation!r})"


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite convex combination of Dirac masses, support sorted ascending."""

    support: tuple[float, ...]
    weights: tuple[float, ...]
    domain: Interval

    @property
    def points(self) -> np.ndarray:
        return np.array(self.support, dtype=float)

    @property
    def probs(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)

    def __len__(self) -> int:
        return len(self.support)

    def as_dict(self) -> dict[float, float]:
        return dict(zip(self.support, self.weights))

    def mean(self) -> float:
        return math.fsum(w * x for x, w in zip(self.support, self.weights))


def make_measure(points: Sequence[float], weights: Sequence[float], domain=(0.0, 1.0)) -> DiscreteMeasure:
    """Build a normalized, deduplicated measure.

    Atoms closer than the canonical rounding are merged by adding weights;
    zero-weight atoms are dropped.
    """
    domain = as_interval(domain)
    points = [float(p) for p in points]
    weights = [float(w) for w in weights]
    if len(points) != len(weights):
        raise ValueError("points and weights differ in length")
    for w in weights:
        if not math.isfinite(w) or w < 0:
            raise NegativeWeight(f"weight {w} is negative or non-finite")
    for p in points:
        if not domain.contains(p):
            raise PointOutsideDomain(f"point {p} outside [{domain.lo}, {domain.hi}]")
    total = math.fsum(weights)
    if total <= 0:
        raise ZeroTotalMass("measure has zero total mass")
    # atoms merge on their rounded key but keep the first exact coordinate,
    # so an atom placed exactly on a threshold stays on it
    merged: dict[float, list] = {}
    for p, w in zip(points, weights):
        if w == 0.0:
            continue
        slot = merged.setdefault(canonical(p), [p, 0.0])
        slot[1] += w
    keys = sorted(merged)
    support = tuple(merged[k][0] + 0.0 for k in keys)
    ws = [merged[k][1] / total for k in keys]
    # exact renormalisation of the largest weight absorbs the rounding residue
    residue = 1.0 - math.fsum(ws)
    ws[int(np.argmax(ws))] += residue
    return DiscreteMeasure(support, tuple(ws), domain)


def dirac(point: float, domain=(0.0, 1.0)) -> DiscreteMeasure:
    return make_measure([point], [1.0], domain)


def moment(mu: DiscreteMeasure, g: Callable) -> float:
    """Generalized moment: the sum of weights times g at the atoms."""
    values = np.atleast_1d(np.asarray(g(mu.points), dtype=float))
    if not np.all(np.isfinite(values)):
        raise UndefinedAtSupport("moment function not finite on the support")
    return math.fsum((w * v for w, v in zip(mu.weights, values.tolist())))


@dataclass(frozen=True)
class QuantityOfInterest:
    """A real functional of (f, mu).

    ``tail_probability`` is mu[f >= a]; ``expectation`` is E_mu[f];
    ``custom`` wraps a callable ``fn(mu, f) -> float``.
    """

    kind: str
    f: Optional[Callable] = None
    threshold: Optional[float] = None
    fn: Optional[Callable] = None
    lower_range: float = -math.inf
    upper_range: float = math.inf

    @classmethod
    def tail_probability(cls, f: Callable, a: float) -> "QuantityOfInterest":
        return cls("tail_probability", f=f, threshold=float(a), lower_range=0.0, upper_range=1.0)

    @classmethod
    def expectation(cls, f: Callable, lower_range: Optional[float] = None,
                    upper_range: Optional[float] = None) -> "QuantityOfInterest":
        if lower_range is None or upper_range is None:
            ys = getattr(f, "ys", None)
            if ys is not None:
                lower_range = float(ys.min()) if lower_range is None else lower_range
                upper_range = float(ys.max()) if upper_range is None else upper_range
        return cls("expectation", f=f,
                   lower_range=-math.inf if lower_range is None else float(lower_range),
                   upper_range=math.inf if upper_range is None else float(upper_range))

    @classmethod
    def custom(cls, fn: Callable, lower_range: float, upper_range: float) -> "QuantityOfInterest":
        return cls("custom", fn=fn, lower_range=float(lower_range), upper_range=float(upper_range))

    @property
    def is_linear(self) -> bool:
        """True when the functional is linear in the weights for fixed atoms."""
        return self.kind in ("tail_probability", "expectation")

    def atom_values(self, points: np.ndarray, f: Optional[Callable] = None,
                    f_values: Optional[np.ndarray] = None) -> np.ndarray:
        """Per-atom contributions c such that Phi = sum(w * c) (linear kinds only)."""
        if not self.is_linear:
            raise TypeError("custom quantities have no per-atom decomposition")
        if f_values is None:
            func = f if f is not None else self.f
            f_values = np.atleast_1d(np.asarray(func(points), dtype=float))
        if self.kind == "tail_probability":
            return (f_values >= self.threshold - TIE_TOL).astype(float)
        return np.asarray(f_values, dtype=float)


def evaluate_qoi(phi: QuantityOfInterest, mu: DiscreteMeasure, f: Optional[Callable] = None,
                 f_values: Optional[Sequence[float]] = None) -> float:
    """Evaluate the quantity of interest; ``f`` overrides the QoI's own function."""
    if phi.kind == "custom":
        value = float(phi.fn(mu, f if f is not None else phi.f))
    else:
        fv = None if f_values is None else np.asarray(f_values, dtype=float)
        contrib = phi.atom_values(mu.points, f, fv)
        value = math.fsum((w * c for w, c in zip(mu.weights, contrib.tolist())))
    if not (phi.lower_range - 1e-9 <= value <= phi.upper_range + 1e-9):
        raise ValueError(f"quantity {value} outside declared range [{phi.lower_range}, {phi.upper_range}]")
    return value


@dataclass(frozen=True)
class DataDistribution:
    """Distribution over a finite, ordered data alphabet."""

    alphabet: tuple
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.alphabet) != len(self.probabilities):
            raise ValueError("alphabet and probabilities differ in length")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet symbols must be distinct")
        if any(p < 0 for p in self.probabilities):
            raise ValueError("negative probability")
        if abs(math.fsum(self.probabilities) - 1.0) > WEIGHT_TOL:
            raise ValueError("probabilities do not sum to 1")

    def as_dict(self) -> dict:
        return dict(zip(self.alphabet, self.probabilities))

    def prob(self, symbol: Hashable) -> float:
        return self.as_dict().get(symbol, 0.0)

    def on(self, alphabet: Sequence) -> np.ndarray:
        """Probabilities re-indexed onto a (super-)alphabet."""
        table = self.as_dict()
        missing = set(table) - set(alphabet)
        if missing:
            raise ValueError(f"symbols {sorted(missing, key=repr)[:3]} not in target alphabet")
        return np.array([table.get(s, 0.0) for s in alphabet], dtype=float)


def multiset_count(n_labels: int, n: int) -> int:
    return math.comb(n_labels + n - 1, n)


def multiset_distribution(labels: Sequence[Hashable], weights: Sequence[float], n: int,
                          cap: int = DEFAULT_ALPHABET_CAP) -> DataDistribution:
    """Law of the multiset of n i.i.d. draws from a finite labelled distribution.

    Equal labels are merged first, so the alphabet is the set of size-n
    multisets over the distinct labels, each stored as a sorted tuple.
    """
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    merged: dict = {}
    for lab, w in zip(labels, weights):
        if w > 0:
            merged[lab] = merged.get(lab, 0.0) + float(w)
    labs = sorted(merged)
    probs = [merged[lab] for lab in labs]
    size = multiset_count(len(labs), n)
    if size > cap:
        raise AlphabetTooLarge(f"{size} multisets exceed the alphabet cap {cap}")
    alphabet = []
    out = []
    log_fact_n = math.lgamma(n + 1)
    for combo in itertools.combinations_with_replacement(range(len(labs)), n):
        counts: dict[int, int] = {}
        for i in combo:
            counts[i] = counts.get(i, 0) + 1
        coef = math.exp(log_fact_n - sum(math.lgamma(c + 1) for c in counts.values()))
        coef = float(round(coef)) if coef < 2**52 else coef
        p = coef
        for i, c in counts.items():
            p *= probs[i] ** c
        alphabet.append(tuple(labs[i] for i in combo))
        out.append(p)
    total = math.fsum(out)
    out = [p / total for p in out]
    return DataDistribution(tuple(alphabet), tuple(out))


def iid_data(mu: DiscreteMeasure, n: int, cap: int = DEFAULT_ALPHABET_CAP) -> DataDistribution:
    """Distribution of the multiset of n i.i.d. samples from ``mu``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return multiset_distribution(mu.support, mu.weights, n, cap)
