"""
sketchcluster - Community detection on partially observed graphs from small node sketches.

Example:
    >>> from sketchcluster import PipelineConfig, SbmParams, generate, run_pipeline
    >>>
    >>> graph, truth = generate(SbmParams(600, (200, 200, 200), p=0.85, q=0.05, rho=0.6, seed=1))
    >>> result = run_pipeline(graph, truth, PipelineConfig(sampler={"strategy": "sbs", "n_samples": 150}))
    >>> result.success
    True
"""

from sketchcluster.clustering import (
    ClusterModel,
    exact_match,
    extract_clusters,
    reconstruct_L,
    retrieval_failure_rate_mc,
    retrieve_full,
)
from sketchcluster.config import (
    ExperimentPreset,
    LambdaMode,
    PipelineConfig,
    SamplerConfig,
    SamplingStrategy,
    SolverConfig,
    get_preset,
    get_preset_description,
    list_presets,
    load_config,
)
from sketchcluster.decomposition import (
    LambdaSearchResult,
    decompose,
    initial_lambda,
    solve_sketch,
    solve_with_lambda_search,
    validate_cluster_matrix,
)
from sketchcluster.exceptions import (
    ClusteringError,
    ConfigError,
    EdgeListParseError,
    NoObservationsError,
    NumericalError,
    ReportError,
    SketchClusterError,
    SolverError,
    ValidationError,
)
from sketchcluster.experiments import (
    GridSpec,
    emit_report,
    run_balance_diagnostics,
    run_full_vs_sketch,
    run_phase_grid,
    run_timing_sweep,
)
from sketchcluster.graph import (
    EdgeState,
    ObservedGraph,
    Partition,
    SketchIndex,
    degree_l0,
    read_edge_list,
    read_partition,
    subgraph,
    write_edge_list,
    write_partition,
)
from sketchcluster.logging import RunLogger
from sketchcluster.pipeline import (
    run_algorithm1,
    run_algorithm4,
    run_full_decomposition,
    run_pipeline,
    stage_rngs,
)
from sketchcluster.results import Decomposition, GridResult, PipelineResult, RunLog, StageTimings
from sketchcluster.sampling import (
    CompletedGraph,
    precomplete,
    sample_mixed,
    sample_sbs,
    sample_srs,
    sample_urs,
)
from sketchcluster.sbm import GroundTruth, SbmParams, generate, unbalanced_preset
from sketchcluster.theory import (
    Regime,
    TheoryBounds,
    TheoryInputs,
    Verdict,
    check_sbs_theorems,
    check_theorem1,
    check_urs_sampling,
    compute_bounds,
    sketch_probability_bounds,
)
from sketchcluster.workspace import ReportPaths, ReportWorkspace

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # Graphs
    "EdgeState",
    "ObservedGraph",
    "Partition",
    "SketchIndex",
    "subgraph",
    "degree_l0",
    "read_edge_list",
    "write_edge_list",
    "read_partition",
    "write_partition",
    # Generation
    "SbmParams",
    "GroundTruth",
    "generate",
    "unbalanced_preset",
    # Sampling
    "sample_urs",
    "sample_sbs",
    "sample_srs",
    "sample_mixed",
    "precomplete",
    "CompletedGraph",
    # Decomposition
    "decompose",
    "initial_lambda",
    "solve_sketch",
    "solve_with_lambda_search",
    "validate_cluster_matrix",
    "LambdaSearchResult",
    # Clustering and retrieval
    "ClusterModel",
    "extract_clusters",
    "retrieve_full",
    "exact_match",
    "reconstruct_L",
    "retrieval_failure_rate_mc",
    # Theory
    "TheoryInputs",
    "TheoryBounds",
    "Verdict",
    "Regime",
    "compute_bounds",
    "check_urs_sampling",
    "check_theorem1",
    "check_sbs_theorems",
    "sketch_probability_bounds",
    # Pipeline
    "run_algorithm1",
    "run_algorithm4",
    "run_pipeline",
    "run_full_decomposition",
    "stage_rngs",
    # Experiments
    "GridSpec",
    "run_phase_grid",
    "run_timing_sweep",
    "run_balance_diagnostics",
    "run_full_vs_sketch",
    "emit_report",
    # Configuration
    "SamplerConfig",
    "SolverConfig",
    "PipelineConfig",
    "SamplingStrategy",
    "LambdaMode",
    "ExperimentPreset",
    "get_preset",
    "list_presets",
    "get_preset_description",
    "load_config",
    # Results
    "Decomposition",
    "PipelineResult",
    "StageTimings",
    "GridResult",
    "RunLog",
    # Logging and reports
    "RunLogger",
    "ReportWorkspace",
    "ReportPaths",
    # Exceptions
    "SketchClusterError",
    "ValidationError",
    "ConfigError",
    "NoObservationsError",
    "EdgeListParseError",
    "SolverError",
    "NumericalError",
    "ClusteringError",
    "ReportError",
]
