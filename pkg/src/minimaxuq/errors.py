"""Exception hierarchy.

Every error carries the name of the module that raised it so the CLI can
report provenance.
"""

from __future__ import annotations


class MinimaxUQError(Exception):
    module = "minimaxuq"


# measure_core
class MeasureError(MinimaxUQError):
    module = "measure"


class NegativeWeight(MeasureError):
    pass


class PointOutsideDomain(MeasureError):
    pass


class ZeroTotalMass(MeasureError):
    pass


class UndefinedAtSupport(MeasureError):
    pass


class AlphabetTooLarge(MeasureError):
    pass


# admissible
class AdmissibleError(MinimaxUQError):
    module = "admissible"


class MissingFunction(AdmissibleError):
    pass


class CandidateCapExceeded(AdmissibleError):
    pass


class EmptyEnumeration(AdmissibleError):
    pass


# ouq_solver
class OUQError(MinimaxUQError):
    module = "ouq"


class InfeasibleSet(OUQError):
    pass


class NumericalFailure(OUQError):
    pass


class DomainError(OUQError):
    pass


# risk
class RiskError(MinimaxUQError):
    module = "risk"


class AlphabetMismatch(RiskError):
    pass


class EmptyCandidates(RiskError):
    pass


class LengthMismatch(RiskError):
    pass


# minimax_game
class GameError(MinimaxUQError):
    module = "game"


class DegeneratePrior(GameError):
    pass


class NonConvergence(GameError):
    pass


class NonConvexLoss(GameError):
    pass


# confidence
class ConfidenceError(MinimaxUQError):
    module = "confidence"


class NonMonotoneDetected(ConfidenceError):
    pass


# brittleness
class BrittlenessError(MinimaxUQError):
    module = "brittleness"


class AbsolutelyContinuous(BrittlenessError):
    pass


class NotOrthogonal(BrittlenessError):
    pass


class DegenerateRange(BrittlenessError):
    pass


# cli
class SpecError(MinimaxUQError):
    module = "cli"


class ParseError(SpecError):
    pass


class SchemaError(SpecError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class InfeasibleProbe(SpecError):
    pass
