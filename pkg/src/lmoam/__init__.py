"""Attention-guided large-scale multiobjective optimization.

A reusable optimizer library (variance-bucketed attention over decision
variables plus NSGA-II machinery), the LSMOP1-9 benchmark suite, IGD/HV
indicators, and a CLI harness for seeded benchmark experiments.
"""

__version__ = "0.1.0"

from .core import (
    Bounds,
    BudgetExhausted,
    ConfigurationError,
    ContractViolation,
    EvaluationCounter,
    Individual,
    Population,
    Problem,
    RunRecord,
    clamp,
    dominates,
    evaluate_population,
    make_rng,
)
from .ea import (
    VariationConfig,
    crowding_distance,
    environmental_selection,
    nondominated_sort,
    nsga2_run,
    polynomial_mutation,
    sbx_crossover,
)
from .attention import (
    KeyMatrix,
    Query,
    VarianceVector,
    apply_attention,
    build_key,
    init_queries,
    select_value,
    variance_vector,
)
from .indicators import IndicatorResult, hv, igd, normalized_hv
from .lsmop import (
    LsmopProblem,
    ReferenceFront,
    load_front_csv,
    make_problem,
    sample_reference_front,
    save_front_csv,
)
from .optimizer import LmoamConfig, QueryGeneration, inner_query_search, lmoam_run
from .harness import (
    ExperimentConfig,
    parse_config,
    run_experiment,
    summarize,
    wilcoxon_rank_sum,
)

__all__ = [
    "Bounds",
    "BudgetExhausted",
    "ConfigurationError",
    "ContractViolation",
    "EvaluationCounter",
    "ExperimentConfig",
    "Individual",
    "IndicatorResult",
    "KeyMatrix",
    "LmoamConfig",
    "LsmopProblem",
    "Population",
    "Problem",
    "Query",
    "QueryGeneration",
    "ReferenceFront",
    "RunRecord",
    "VarianceVector",
    "VariationConfig",
    "apply_attention",
    "build_key",
    "clamp",
    "crowding_distance",
    "dominates",
    "environmental_selection",
    "evaluate_population",
    "hv",
    "igd",
    "init_queries",
    "inner_query_search",
    "lmoam_run",
    "load_front_csv",
    "make_problem",
    "make_rng",
    "nondominated_sort",
    "normalized_hv",
    "nsga2_run",
    "parse_config",
    "polynomial_mutation",
    "run_experiment",
    "sample_reference_front",
    "save_front_csv",
    "sbx_crossover",
    "select_value",
    "summarize",
    "variance_vector",
    "wilcoxon_rank_sum",
]
