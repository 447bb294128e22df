"""Optimal uncertainty quantification bounds and minimax estimation games on finite instances."""

from .admissible import (
    AdmissibleSet,
    FunctionBand,
    LatticeSpec,
    MomentConstraint,
    enumerate_candidates,
    is_feasible,
    reduced_parametrization,
)
from .errors import MinimaxUQError
from .game import (
    GameOptions,
    GameSolution,
    bayes_estimator,
    compare_experiments,
    least_favorable_prior,
    minimax_estimator,
    mix_estimators,
)
from .measure import (
    DataDistribution,
    DiscreteMeasure,
    QuantityOfInterest,
    TabulatedFunction,
    dirac,
    evaluate_qoi,
    iid_data,
    make_measure,
    moment,
)
from .ouq import SolverOptions, certify, lower_bound, markov_oracle, upper_bound
from .risk import (
    CandidateSet,
    DataMap,
    Estimator,
    LossFunction,
    Prior,
    averaged_risk,
    bias_variance,
    statistical_error,
    worst_case_error,
)

__version__ = "0.1.0"
