"""End-to-end sketch clustering: sample, decompose, extract, retrieve."""

from __future__ import annotations

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager

import numpy as np

from sketchcluster.clustering import (
    ClusterModel,
    assign_from_scores,
    exact_match,
    extract_clusters,
    retrieval_scores,
)
from sketchcluster.config import PipelineConfig, SamplingStrategy, SolverConfig
from sketchcluster.decomposition import solve_sketch
from sketchcluster.exceptions import ClusteringError, ValidationError
from sketchcluster.graph import ObservedGraph, Partition, SketchIndex, subgraph
from sketchcluster.results import PipelineResult, StageTimings
from sketchcluster.sampling import draw_sketch, precomplete
from sketchcluster.sbm import GroundTruth

logger = logging.getLogger("sketchcluster.pipeline")

_UNIFORM_STRATEGIES = (SamplingStrategy.URS, SamplingStrategy.SBS)
_SPATIAL_STRATEGIES = (SamplingStrategy.SRS, SamplingStrategy.MIXED)


def stage_rngs(seed: int | None) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """
    Independent generators for pre-completion, sampling and extraction.

    All three are spawned from one SeedSequence, so a stage run by hand
    with the matching generator reproduces the pipeline exactly.
    """
    children = np.random.SeedSequence(seed).spawn(3)
    precomplete_rng, sample_rng, extract_rng = (np.random.default_rng(c) for c in children)
    return precomplete_rng, sample_rng, extract_rng


@contextmanager
def _timed(timings: StageTimings, stage: str, enabled: bool) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        if enabled:
            setattr(timings, stage, time.perf_counter() - start)


def _cluster_sketch(
    graph: ObservedGraph,
    sampling_graph: ObservedGraph,
    truth: GroundTruth | None,
    cfg: PipelineConfig,
    sample_rng: np.random.Generator,
    extract_rng: np.random.Generator,
    timings: StageTimings,
    seed: int | None,
) -> PipelineResult:
    record = cfg.record_timings
    with _timed(timings, "sample", record):
        idx = draw_sketch(sampling_graph, cfg.sampler, sample_rng)
    sketch = subgraph(graph, idx)
    logger.info("Sampled %d of %d nodes with %s", len(idx), graph.n_nodes, cfg.sampler.strategy)

    decomposition = None
    valid = True
    steps = 0
    if len(idx) == 1:
        model = ClusterModel.from_partition(Partition(np.zeros(1, dtype=np.int64)))
    else:
        with _timed(timings, "decompose", record):
            search = solve_sketch(sketch, cfg.solver)
        decomposition, valid, steps = search.decomposition, search.valid, search.steps
        with _timed(timings, "extract", record):
            try:
                model = extract_clusters(decomposition.low_rank, cfg.solver.rounding_threshold, extract_rng)
            except ClusteringError as e:
                logger.warning("No clusters extracted from the sketch: %s", e)
                return PipelineResult(
                    partition=Partition(np.zeros(graph.n_nodes, dtype=np.int64)),
                    sketch_index=idx,
                    decomposition=decomposition,
                    sketch_valid=False,
                    r_hat=0,
                    lambda_search_steps=steps,
                    success=False if truth is not None else None,
                    timings=timings,
                    strategy=cfg.sampler.strategy.value,
                    seed=seed,
                )

    with _timed(timings, "retrieve", record):
        partition, uncorrelated = assign_from_scores(retrieval_scores(graph, idx, model))

    success = exact_match(partition, truth.partition) if truth is not None else None
    logger.info(
        "Recovered %d clusters (sketch valid=%s, lambda steps=%d, success=%s)",
        partition.r,
        valid,
        steps,
        success,
    )
    return PipelineResult(
        partition=partition,
        sketch_index=idx,
        decomposition=decomposition,
        sketch_valid=valid,
        r_hat=model.r_hat,
        lambda_search_steps=steps,
        uncorrelated_nodes=uncorrelated,
        success=success,
        timings=timings,
        strategy=cfg.sampler.strategy.value,
        seed=seed,
    )


def run_algorithm1(
    graph: ObservedGraph,
    truth: GroundTruth | None = None,
    cfg: PipelineConfig | None = None,
    seed: int | None = None,
) -> PipelineResult:
    """
    Cluster a graph from a URS or SbS sketch.

    Args:
        graph: Partially observed graph
        truth: Planted partition; when given, success is set
        cfg: Pipeline settings (sampler strategy must be urs or sbs)
        seed: Overrides cfg.sampler.seed

    Returns:
        PipelineResult covering all N nodes

    Raises:
        ValidationError: If the strategy needs pre-completion
    """
    cfg = cfg or PipelineConfig()
    if cfg.sampler.strategy not in _UNIFORM_STRATEGIES:
        raise ValidationError(f"run_algorithm1 supports urs and sbs, got {cfg.sampler.strategy}")
    seed = cfg.sampler.seed if seed is None else seed
    _, sample_rng, extract_rng = stage_rngs(seed)
    return _cluster_sketch(graph, graph, truth, cfg, sample_rng, extract_rng, StageTimings(), seed)


def run_algorithm4(
    graph: ObservedGraph,
    truth: GroundTruth | None = None,
    cfg: PipelineConfig | None = None,
    seed: int | None = None,
) -> PipelineResult:
    """
    Cluster a graph from an SRS or mixed sketch.

    Sampling runs on the pre-completed graph; the sketch itself and the
    retrieval step read the original graph.

    Raises:
        ValidationError: If the strategy is not srs/mixed, or pre-completion
            is disabled on a partially observed graph
    """
    cfg = cfg or PipelineConfig(sampler={"strategy": SamplingStrategy.SRS})
    if cfg.sampler.strategy not in _SPATIAL_STRATEGIES:
        raise ValidationError(f"run_algorithm4 supports srs and mixed, got {cfg.sampler.strategy}")
    seed = cfg.sampler.seed if seed is None else seed
    precomplete_rng, sample_rng, extract_rng = stage_rngs(seed)
    timings = StageTimings()

    budget = cfg.effective_precomplete_budget
    if budget == 0:
        if graph.observation_rate() < 1.0:
            raise ValidationError(
                "Spatial sampling of a partially observed graph needs precomplete_budget > 0"
            )
        sampling_graph = graph
    else:
        with _timed(timings, "precomplete", cfg.record_timings):
            sampling_graph = precomplete(graph, budget, cfg.solver, precomplete_rng).graph

    return _cluster_sketch(graph, sampling_graph, truth, cfg, sample_rng, extract_rng, timings, seed)


def run_pipeline(
    graph: ObservedGraph,
    truth: GroundTruth | None = None,
    cfg: PipelineConfig | None = None,
    seed: int | None = None,
) -> PipelineResult:
    """Dispatch to run_algorithm1 or run_algorithm4 by sampling strategy."""
    cfg = cfg or PipelineConfig()
    if cfg.sampler.strategy in _SPATIAL_STRATEGIES:
        return run_algorithm4(graph, truth, cfg, seed)
    return run_algorithm1(graph, truth, cfg, seed)


def run_full_decomposition(
    graph: ObservedGraph,
    truth: GroundTruth | None = None,
    solver: SolverConfig | None = None,
    seed: int | None = None,
) -> PipelineResult:
    """
    Baseline: decompose the whole graph and read clusters off L directly.

    Equivalent to the sketch pipeline with N' = N and no retrieval.
    """
    solver = solver or SolverConfig()
    _, _, extract_rng = stage_rngs(seed)
    timings = StageTimings()
    idx = SketchIndex.full(graph.n_nodes)

    with _timed(timings, "decompose", True):
        search = solve_sketch(graph, solver)
    with _timed(timings, "extract", True):
        try:
            partition = extract_clusters(
                search.decomposition.low_rank, solver.rounding_threshold, extract_rng
            ).partition
        except ClusteringError as e:
            logger.warning("Full-graph decomposition yielded no clusters: %s", e)
            partition = None

    if partition is None:
        return PipelineResult(
            partition=Partition(np.zeros(graph.n_nodes, dtype=np.int64)),
            sketch_index=idx,
            decomposition=search.decomposition,
            sketch_valid=False,
            r_hat=0,
            lambda_search_steps=search.steps,
            success=False if truth is not None else None,
            timings=timings,
            strategy="full",
            seed=seed,
        )
    return PipelineResult(
        partition=partition,
        sketch_index=idx,
        decomposition=search.decomposition,
        sketch_valid=search.valid,
        r_hat=partition.r,
        lambda_search_steps=search.steps,
        success=exact_match(partition, truth.partition) if truth is not None else None,
        timings=timings,
        strategy="full",
        seed=seed,
    )
