"""Monte Carlo simulation of randomized experiments with network interference.

Deterministic simulator of content production over connected
Watts-Strogatz graphs: a treatment boost applied to a node subset leaks
through neighbour feedback into the control group, and this package
measures the resulting spillover, dampening, clustering and size
effects.
"""

from .dynamics import (
    ContentState,
    DynamicsParams,
    Regularization,
    TimeSeries,
    analytic_c_base,
    analytic_c_full,
    regularized_fixed_point,
    simulate,
    stability_margin,
    step,
)
from .errors import (
    DivergenceError,
    GenerationError,
    NetrctError,
    NumericError,
    ParameterError,
    StabilityError,
)
from .experiments import (
    Assignment,
    EffectReport,
    ExperimentConfig,
    SweepResult,
    assign_clustered,
    assign_random,
    content_by_degree,
    degree_distribution_effect,
    run_baseline,
    run_experiment,
    run_experiment_on,
    run_p_sweep,
    run_size_sweep,
)
from .graph import (
    DegreeHistogram,
    GroupPartition,
    Graph,
    WattsStrogatzParams,
    degree_histogram,
    generate_watts_strogatz,
    mean_degree_of,
    partition_by_treatment,
    within_group_edge_fraction,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "ContentState",
    "DegreeHistogram",
    "DivergenceError",
    "DynamicsParams",
    "EffectReport",
    "ExperimentConfig",
    "GenerationError",
    "Graph",
    "GroupPartition",
    "NetrctError",
    "NumericError",
    "ParameterError",
    "Regularization",
    "StabilityError",
    "SweepResult",
    "TimeSeries",
    "WattsStrogatzParams",
    "analytic_c_base",
    "analytic_c_full",
    "assign_clustered",
    "assign_random",
    "content_by_degree",
    "degree_distribution_effect",
    "degree_histogram",
    "generate_watts_strogatz",
    "mean_degree_of",
    "partition_by_treatment",
    "regularized_fixed_point",
    "run_baseline",
    "run_experiment",
    "run_experiment_on",
    "run_p_sweep",
    "run_size_sweep",
    "simulate",
    "stability_margin",
    "step",
    "within_group_edge_fraction",
]
