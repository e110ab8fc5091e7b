"""Inference package: Gaussian primitives, selectors, confidence sets and bounds."""

__version__ = "0.1.0"

from .errors import (
    SparseCIError,
    DomainError,
    InvariantViolation,
    PreconditionError,
    ConsistencyError,
    ThresholdError,
    InfeasibleError,
    RegimeError,
    MalformedInputError,
)
from .model import (
    Side,
    SignPattern,
    ProblemParams,
    MeanVector,
    Observation,
    SparseConfidenceSet,
    make_spike_vector,
    derive_seed,
    sample_observation,
)
from .bounds import Region, ThresholdReport, BoundValue, MinimaxBound, thresholds, minimax_noncoverage
from .selectors import SelectorKind, SelectionRule, dyadic_round
from .intervals import MethodTag, RegionTag, IntervalProcedure, make_procedure

__all__ = [
    "__version__",
    "SparseCIError",
    "DomainError",
    "InvariantViolation",
    "PreconditionError",
    "ConsistencyError",
    "ThresholdError",
    "InfeasibleError",
    "RegimeError",
    "MalformedInputError",
    "Side",
    "SignPattern",
    "ProblemParams",
    "MeanVector",
    "Observation",
    "SparseConfidenceSet",
    "make_spike_vector",
    "derive_seed",
    "sample_observation",
    "Region",
    "ThresholdReport",
    "BoundValue",
    "MinimaxBound",
    "thresholds",
    "minimax_noncoverage",
    "SelectorKind",
    "SelectionRule",
    "dyadic_round",
    "MethodTag",
    "RegionTag",
    "IntervalProcedure",
    "make_procedure",
]
