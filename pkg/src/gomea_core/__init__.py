"""Discrete and real-valued GOMEA with native gray-box partial evaluations."""

from .core import (
    ConfigurationError,
    ContractViolationError,
    ProblemSize,
    RngStream,
    make_rng,
)
from .fitness import (
    BlackBoxFunction,
    EvaluationCounter,
    Evaluator,
    Problem,
    Solution,
    SubfunctionDecomposition,
    SubfunctionError,
    build_dependency_index,
    full_evaluate_bbo,
    full_evaluate_gbo,
    is_improvement,
    is_strict_improvement,
    partial_evaluate,
)
from .ims import Budgets, IMSConfig, IMSScheduler, Runner, optimize
from .linkage import FOS, VIG, LinkageConfig, LinkageModel, parse_linkage_spec
from .realvalued import RVConfig
from .stats import METRIC_KEYS, RunStatistics

__all__ = [
    "BlackBoxFunction",
    "Budgets",
    "ConfigurationError",
    "ContractViolationError",
    "EvaluationCounter",
    "Evaluator",
    "FOS",
    "IMSConfig",
    "IMSScheduler",
    "LinkageConfig",
    "LinkageModel",
    "METRIC_KEYS",
    "Problem",
    "ProblemSize",
    "RVConfig",
    "RngStream",
    "Runner",
    "RunStatistics",
    "Solution",
    "SubfunctionDecomposition",
    "SubfunctionError",
    "VIG",
    "build_dependency_index",
    "full_evaluate_bbo",
    "full_evaluate_gbo",
    "is_improvement",
    "is_strict_improvement",
    "make_rng",
    "optimize",
    "parse_linkage_spec",
]

__version__ = "0.1.0"
