"""Problem specification documents: YAML (or JSON) text to a validated ProblemSpec.

Numbers may be written as plain numbers or as decimal strings.  Functions
are ``(x, value)`` pair lists, names declared under ``functions``, or the
built-in ``identity``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

import numpy as np
import yaml

from .admissible import AdmissibleSet, FunctionBand, LatticeSpec, MomentConstraint, enumerate_candidates
from .errors import InfeasibleProbe, ParseError, SchemaError
from .game import GameOptions
from .measure import Interval, QuantityOfInterest, TabulatedFunction, make_measure
from .ouq import SolverOptions
from .risk import DataMap, Estimator, LossFunction, Prior

KINDS = ("ouq_bound", "certify", "minimax_estimate", "confidence_interval",
         "compare_experiments", "mix_estimators", "brittleness_demo")
GAME_KINDS = ("minimax_estimate", "confidence_interval", "compare_experiments", "mix_estimators")


@dataclass
class ProblemSpec:
    kind: str
    raw: dict
    domain: Optional[Interval] = None
    grid: tuple = ()
    functions: dict = field(default_factory=dict)
    a_set: Optional[AdmissibleSet] = None
    qoi: Optional[QuantityOfInterest] = None
    sense: str = "both"
    epsilon: Optional[float] = None
    loss: LossFunction = field(default_factory=LossFunction.squared)
    data_maps: tuple = ()
    candidates: Optional[list] = None
    lattice: Optional[LatticeSpec] = None
    estimators: list = field(default_factory=list)
    priors: Optional[tuple] = None
    instance: Optional[str] = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    game: GameOptions = field(default_factory=GameOptions)

    def candidate_items(self) -> list:
        if self.candidates is not None:
            return self.candidates
        return enumerate_candidates(self.a_set, self.lattice)

    def with_overrides(self, **solver_overrides) -> "ProblemSpec":
        kw = {k: v for k, v in solver_overrides.items() if v is not None}
        return replace(self, solver=replace(self.solver, **kw)) if kw else self


def parse_text(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"spec is not valid YAML/JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("spec must be a mapping at top level")
    return doc


def _num(value: Any, path: str) -> float:
    if isinstance(value, bool) or value is None:
        raise SchemaError(path, "number expected")
    try:
        x = float(str(value).strip()) if isinstance(value, str) else float(value)
    except (TypeError, ValueError):
        raise SchemaError(path, f"number expected, got {value!r}") from None
    if not math.isfinite(x):
        raise SchemaError(path, "finite number expected")
    return x


def _int(value: Any, path: str, minimum: int = 0) -> int:
    x = _num(value, path)
    if x != int(x) or x < minimum:
        raise SchemaError(path, f"integer >= {minimum} expected")
    return int(x)


def _nums(value: Any, path: str) -> list[float]:
    if not isinstance(value, (list, tuple)):
        raise SchemaError(path, "list of numbers expected")
    return [_num(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _require(doc: dict, key: str, path: str = "") -> Any:
    full = f"{path}.{key}" if path else key
    if key not in doc or doc[key] is None:
        raise SchemaError(full, "required field missing")
    return doc[key]


def _mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(path, "mapping expected")
    return value


class _Builder:
    def __init__(self, doc: dict):
        self.doc = doc
        self.domain: Optional[Interval] = None
        self.grid: tuple = ()
        self.functions: dict = {}

    def function(self, ref: Any, path: str) -> TabulatedFunction:
        if isinstance(ref, str):
            if ref in self.functions:
                return self.functions[ref]
            if ref == "identity":
                return TabulatedFunction.identity(self.grid)
            raise SchemaError(path, f"unknown function {ref!r}")
        interpolation = "linear"
        if isinstance(ref, dict):
            interpolation = ref.get("interpolation", "linear")
            ref = _require(ref, "pairs", path)
            path = f"{path}.pairs"
        if not isinstance(ref, list) or not ref:
            raise SchemaError(path, "function must be a name or a nonempty list of [x, value] pairs")
        pairs = []
        for i, p in enumerate(ref):
            if not isinstance(p, (list, tuple)) or len(p) != 2:
                raise SchemaError(f"{path}[{i}]", "[x, value] pair expected")
            pairs.append((_num(p[0], f"{path}[{i}][0]"), _num(p[1], f"{path}[{i}][1]")))
        try:
            fn = TabulatedFunction.from_pairs(pairs, interpolation)
        except ValueError as exc:
            raise SchemaError(path, str(exc)) from None
        if self.grid:
            xs = np.asarray(fn.xs)
            g = np.asarray(self.grid)
            if interpolation == "exact":
                missing = [x for x in g if not np.any(np.isclose(xs, x, rtol=0, atol=1e-12))]
            else:
                missing = [x for x in g if x < xs.min() - 1e-12 or x > xs.max() + 1e-12]
            if missing:
                raise SchemaError(path, f"function not tabulated on grid point {missing[0]}")
        return fn

    def geometry(self) -> None:
        doc = self.doc
        dom = _nums(_require(doc, "domain"), "domain")
        if len(dom) != 2 or not dom[0] <= dom[1]:
            raise SchemaError("domain", "[lo, hi] with lo <= hi expected")
        self.domain = Interval(dom[0], dom[1])
        g = doc.get("grid")
        if g is None:
            grid = np.linspace(dom[0], dom[1], 101)
        elif isinstance(g, dict):
            grid = np.linspace(_num(g.get("start", dom[0]), "grid.start"), _num(g.get("stop", dom[1]), "grid.stop"),
                               _int(_require(g, "num", "grid"), "grid.num", 1))
        else:
            grid = np.array(_nums(g, "grid"))
        if grid.size == 0:
            raise SchemaError("grid", "grid must be nonempty")
        if not self.domain.contains(grid):
            raise SchemaError("grid", "grid points must lie in the domain")
        self.grid = tuple(sorted({float(x) for x in grid}))
        for name, ref in _mapping(doc.get("functions", {}), "functions").items():
            self.functions[str(name)] = self.function(ref, f"functions.{name}")

    def admissible(self) -> AdmissibleSet:
        cons = []
        raw = self.doc.get("constraints", []) or []
        if not isinstance(raw, list):
            raise SchemaError("constraints", "list expected")
        for i, c in enumerate(raw):
            p = f"constraints[{i}]"
            c = _mapping(c, p)
            try:
                cons.append(MomentConstraint(self.function(_require(c, "g", p), f"{p}.g"),
                                             str(_require(c, "relation", p)), _num(_require(c, "bound", p), f"{p}.bound")))
            except ValueError as exc:
                raise SchemaError(p, str(exc)) from None
        band = None
        if self.doc.get("function_band") is not None:
            b = _mapping(self.doc["function_band"], "function_band")
            hw = _num(_require(b, "half_width", "function_band"), "function_band.half_width")
            if hw < 0:
                raise SchemaError("function_band.half_width", "must be nonnegative")
            band = FunctionBand(self.function(_require(b, "center", "function_band"), "function_band.center"), hw)
        a_set = AdmissibleSet(self.domain, tuple(cons), band, self.grid)
        if not a_set.probe():
            raise InfeasibleProbe("no measure satisfies the moment constraints")
        return a_set

    def qoi(self) -> QuantityOfInterest:
        q = _mapping(_require(self.doc, "qoi"), "qoi")
        kind = _require(q, "kind", "qoi")
        f = self.function(_require(q, "f", "qoi"), "qoi.f")
        if kind == "tail_probability":
            return QuantityOfInterest.tail_probability(f, _num(_require(q, "threshold", "qoi"), "qoi.threshold"))
        if kind == "expectation":
            return QuantityOfInterest.expectation(f)
        raise SchemaError("qoi.kind", "tail_probability or expectation expected")

    def loss(self) -> LossFunction:
        raw = self.doc.get("loss")
        if raw is None:
            return LossFunction.squared()
        if isinstance(raw, str):
            raw = {"kind": raw}
        raw = _mapping(raw, "loss")
        kind = _require(raw, "kind", "loss")
        if kind == "squared":
            return LossFunction.squared()
        if kind == "threshold":
            gamma = _num(_require(raw, "gamma", "loss"), "loss.gamma")
            if gamma <= 0:
                raise SchemaError("loss.gamma", "positive gamma required")
            return LossFunction.threshold(gamma)
        raise SchemaError("loss.kind", "squared or threshold expected")

    def data_map(self, raw: Any, path: str) -> DataMap:
        if raw == "none":
            return DataMap.none()
        raw = _mapping(raw, path)
        kind = _require(raw, "kind", path)
        if kind == "none":
            return DataMap.none()
        n = _int(raw.get("n", 1), f"{path}.n", 1)
        cap = _int(raw.get("cap", 200_000), f"{path}.cap", 1)
        if kind == "iid":
            return DataMap.iid(n, cap)
        if kind == "response":
            return DataMap.response(n, cap)
        if kind == "coarse":
            return DataMap.coarse(self.function(_require(raw, "g", path), f"{path}.g"), n, cap)
        raise SchemaError(f"{path}.kind", "iid, coarse, response or none expected")

    def candidates(self) -> list:
        raw = self.doc["candidates"]
        if not isinstance(raw, list) or not raw:
            raise SchemaError("candidates", "nonempty list expected")
        out = []
        for i, c in enumerate(raw):
            p = f"candidates[{i}]"
            c = _mapping(c, p)
            try:
                mu = make_measure(_nums(_require(c, "points", p), f"{p}.points"),
                                  _nums(_require(c, "weights", p), f"{p}.weights"), self.domain)
            except Exception as exc:
                raise SchemaError(p, str(exc)) from None
            if c.get("function") is not None:
                out.append((mu, self.function(c["function"], f"{p}.function")))
            else:
                out.append(mu)
        return out

    def lattice(self) -> LatticeSpec:
        raw = _mapping(self.doc["lattice"], "lattice")
        step = _num(_require(raw, "weight_step", "lattice"), "lattice.weight_step")
        if step <= 0:
            raise SchemaError("lattice.weight_step", "positive step required")
        positions = raw.get("positions")
        try:
            return LatticeSpec(step, tuple(_nums(positions, "lattice.positions")) if positions is not None else None)
        except ValueError as exc:
            raise SchemaError("lattice.weight_step", str(exc)) from None

    def estimators(self) -> list:
        raw = _require(self.doc, "estimators")
        if not isinstance(raw, list) or not raw:
            raise SchemaError("estimators", "nonempty list expected")
        out = []
        for i, e in enumerate(raw):
            p = f"estimators[{i}]"
            e = _mapping(e, p)
            if "values" in e:
                out.append(("values", _nums(e["values"], f"{p}.values")))
            elif "constant" in e:
                out.append(("constant", _num(e["constant"], f"{p}.constant")))
            elif "of_mean" in e:
                out.append(("of_mean", self.function(e["of_mean"], f"{p}.of_mean")))
            else:
                raise SchemaError(p, "one of values, constant or of_mean expected")
        return out

    def options(self) -> tuple[SolverOptions, GameOptions]:
        raw = _mapping(self.doc.get("solver", {}) or {}, "solver")
        s = SolverOptions()
        kw = {}
        for key, conv in (("seed", _int), ("restarts", _int), ("max_iters", _int), ("threads", _int)):
            if key in raw:
                kw[key] = conv(raw[key], f"solver.{key}", 1 if key in ("restarts", "threads", "max_iters") else 0)
        if "tol" in raw:
            tol = _num(raw["tol"], "solver.tol")
            if tol <= 0:
                raise SchemaError("solver.tol", "positive tolerance required")
            kw["tol"] = tol
        g = GameOptions()
        if "gap_tol" in raw:
            g = replace(g, gap_tol=_num(raw["gap_tol"], "solver.gap_tol"))
        return replace(s, **kw), g


def _epsilon(doc: dict) -> float:
    eps = _num(_require(doc, "epsilon"), "epsilon")
    if not 0.0 <= eps <= 1.0:
        raise SchemaError("epsilon", "must lie in [0, 1]")
    return eps


def _prior(raw: Any, path: str, k: int) -> Prior:
    w = _nums(raw, path)
    if len(w) != k:
        raise SchemaError(path, f"{k} weights expected")
    try:
        return Prior.from_array(w) if abs(sum(w) - 1.0) > 1e-12 and sum(w) > 0 else Prior(tuple(w))
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def validate(text_or_doc) -> ProblemSpec:
    """Schema-check a spec document; raises ParseError, SchemaError or InfeasibleProbe."""
    doc = parse_text(text_or_doc) if isinstance(text_or_doc, str) else text_or_doc
    kind = _require(doc, "kind")
    if kind not in KINDS:
        raise SchemaError("kind", f"one of {', '.join(KINDS)} expected")
    spec = ProblemSpec(kind, doc)
    b = _Builder(doc)
    spec.solver, spec.game = b.options()

    if kind == "brittleness_demo" and doc.get("instance") is not None:
        if doc["instance"] not in ("A", "B"):
            raise SchemaError("instance", "A or B expected")
        spec.instance = doc["instance"]
        return spec

    b.geometry()
    spec.domain, spec.grid, spec.functions = b.domain, b.grid, b.functions
    spec.qoi = b.qoi()
    if kind in ("ouq_bound", "certify") or doc.get("constraints") or doc.get("function_band"):
        spec.a_set = b.admissible()
    if kind in ("ouq_bound", "certify"):
        if kind == "certify":
            if spec.qoi.kind != "tail_probability":
                raise SchemaError("qoi.kind", "certification needs a tail probability")
            spec.epsilon = _epsilon(doc)
        spec.sense = doc.get("sense", "both")
        if spec.sense not in ("upper", "lower", "both"):
            raise SchemaError("sense", "upper, lower or both expected")
        return spec

    spec.loss = b.loss()
    if kind == "compare_experiments":
        maps = _require(doc, "data_maps")
        if not isinstance(maps, list) or len(maps) != 2:
            raise SchemaError("data_maps", "exactly two data maps expected")
        spec.data_maps = tuple(b.data_map(m, f"data_maps[{i}]") for i, m in enumerate(maps))
    else:
        spec.data_maps = (b.data_map(_require(doc, "data_map"), "data_map"),)

    if doc.get("candidates") is not None:
        spec.candidates = b.candidates()
    elif doc.get("lattice") is not None:
        spec.lattice = b.lattice()
        if spec.a_set is None:
            spec.a_set = b.admissible()
    else:
        raise SchemaError("candidates", "candidates or lattice required")

    if kind == "confidence_interval":
        spec.epsilon = _epsilon(doc)
    if kind == "mix_estimators":
        if spec.loss.kind != "squared":
            raise SchemaError("loss.kind", "estimator mixing needs squared loss")
        spec.estimators = b.estimators()
    if kind == "brittleness_demo":
        pr = _mapping(_require(doc, "priors"), "priors")
        k = len(spec.candidates) if spec.candidates is not None else None
        if k is None:
            raise SchemaError("candidates", "brittleness instances need explicit candidates")
        spec.priors = (_prior(_require(pr, "pi", "priors"), "priors.pi", k),
                       _prior(_require(pr, "pi_dagger", "priors"), "priors.pi_dagger", k))
    return spec


def build_estimator(entry: tuple, alphabet: tuple) -> Estimator:
    kind, payload = entry
    if kind == "values":
        if len(payload) != len(alphabet):
            raise SchemaError("estimators", f"{len(alphabet)} values expected, one per data symbol")
        return Estimator(alphabet, values=payload)
    if kind == "constant":
        return Estimator.constant(alphabet, payload)

    def mean(symbol):
        if not symbol:
            raise SchemaError("estimators", "of_mean needs observed data")
        flat = [s[-1] if isinstance(s, tuple) else s for s in symbol]
        return math.fsum(flat) / len(flat)

    return Estimator.from_function(alphabet, lambda s: float(payload(mean(s))))
