"""parcma: CMA-ES optimization with parallel batch objective evaluation.

The package provides the strategy itself (`run`, `step`, and the
scikit-learn flavored `CmaEs` estimator), a registry of classical benchmark
objectives, a fork-join batch evaluator, and a CSV-emitting command line
harness (``parcma run|sweep|convergence``).
"""

from .errors import (
    DegenerateCovariance,
    InsufficientPoints,
    NonPositiveStepSize,
    NotPositiveDefinite,
    ObjectiveFailure,
    ParcmaError,
    UnknownBenchmark,
    WorkerFailure,
)
from .estimator import CmaEs, minimize
from .linalg import EigenFactors, make_rng
from .objectives import EvalResult, Objective, benchmark, benchmark_names, make_expensive
from .parallel import BatchEvaluator, BatchResult, evaluate_batch, speedup
from .strategy import (
    CmaState,
    GenerationRecord,
    Population,
    Solution,
    StrategyParams,
    Termination,
    default_params,
    init_state,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "BatchEvaluator",
    "BatchResult",
    "CmaEs",
    "CmaState",
    "DegenerateCovariance",
    "EigenFactors",
    "EvalResult",
    "GenerationRecord",
    "InsufficientPoints",
    "NonPositiveStepSize",
    "NotPositiveDefinite",
    "Objective",
    "ObjectiveFailure",
    "ParcmaError",
    "Population",
    "Solution",
    "StrategyParams",
    "Termination",
    "UnknownBenchmark",
    "WorkerFailure",
    "benchmark",
    "benchmark_names",
    "default_params",
    "evaluate_batch",
    "init_state",
    "make_expensive",
    "make_rng",
    "minimize",
    "run",
    "speedup",
    "step",
]
