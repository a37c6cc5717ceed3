"""
Node sampling strategies and data pre-completion.

URS draws uniformly, SbS draws with weights inversely proportional to
observed degree, and SRS picks embedded columns closest to random
directions. All samplers draw without replacement.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from sketchcluster.clustering import extract_clusters
from sketchcluster.config import SamplerConfig, SamplingStrategy, SolverConfig
from sketchcluster.decomposition import solve_sketch
from sketchcluster.exceptions import ClusteringError, ValidationError
from sketchcluster.graph import EdgeState, ObservedGraph, Partition, SketchIndex, subgraph

logger = logging.getLogger("sketchcluster.sampling")


def _check_budget(n_nodes: int, n_samples: int) -> None:
    if n_samples < 1:
        raise ValidationError(f"Sketch size must be >= 1, got {n_samples}")
    if n_samples > n_nodes:
        raise ValidationError(f"Sketch size {n_samples} exceeds graph size {n_nodes}")


def sample_urs(n_nodes: int, n_samples: int, rng: np.random.Generator) -> SketchIndex:
    """Uniform random sampling of n_samples distinct nodes."""
    _check_budget(n_nodes, n_samples)
    return SketchIndex(rng.choice(n_nodes, size=n_samples, replace=False), n_nodes)


def sbs_probabilities(graph: ObservedGraph) -> np.ndarray:
    """First-draw SbS probabilities, proportional to 1/degree_l0."""
    weights = 1.0 / graph.degrees_l0()
    return weights / weights.sum()


def sbs_cluster_probabilities(graph: ObservedGraph, partition: Partition) -> np.ndarray:
    """Probability that the first SbS draw lands in each cluster."""
    if partition.n_nodes != graph.n_nodes:
        raise ValidationError("Partition and graph sizes differ")
    return np.bincount(partition.labels, weights=sbs_probabilities(graph), minlength=partition.r)


def sample_sbs(graph: ObservedGraph, n_samples: int, rng: np.random.Generator) -> SketchIndex:
    """
    Sparsity-based sampling.

    Draws are sequential without replacement; after each draw the
    1/degree weights are renormalized over the remaining nodes.
    """
    _check_budget(graph.n_nodes, n_samples)
    chosen = rng.choice(graph.n_nodes, size=n_samples, replace=False, p=sbs_probabilities(graph))
    return SketchIndex(chosen, graph.n_nodes)


def binary_embedding(n_nodes: int, embed_dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random m x N matrix with independent +-1 entries."""
    if embed_dim < 1:
        raise ValidationError(f"embed_dim must be >= 1, got {embed_dim}")
    return rng.integers(0, 2, size=(embed_dim, n_nodes)).astype(np.float64) * 2.0 - 1.0


def embed_columns(graph: ObservedGraph, embed_dim: int, rng: np.random.Generator) -> np.ndarray:
    """
    Embedded adjacency columns Phi @ A scaled to unit length.

    Unobserved entries count as 0; all-zero embedded columns stay zero.
    """
    embedded = binary_embedding(graph.n_nodes, embed_dim, rng) @ graph.numeric()
    norms = np.linalg.norm(embedded, axis=0)
    return embedded / np.where(norms > 0.0, norms, 1.0)


def sample_srs(
    graph: ObservedGraph,
    n_samples: int,
    embed_dim: int,
    rng: np.random.Generator,
    exclude: np.ndarray | None = None,
) -> SketchIndex:
    """
    Spatial random sampling.

    Columns of the adjacency matrix (unobserved entries as 0) are embedded
    by a random binary matrix and scaled to unit length. Each draw takes a
    fresh isotropic direction and picks the unsampled column with the
    largest inner product, lowest index on ties.

    Args:
        graph: Graph to sample, ideally pre-completed
        n_samples: Number of new nodes to draw
        embed_dim: Embedding dimension m
        rng: Random generator
        exclude: Node ids that may not be drawn

    Returns:
        SketchIndex of the newly drawn nodes only

    Raises:
        ValidationError: If fewer than n_samples nodes are available
    """
    n = graph.n_nodes
    taken = np.zeros(n, dtype=bool)
    if exclude is not None and len(exclude):
        taken[np.asarray(exclude, dtype=np.int64)] = True
    _check_budget(n - int(taken.sum()), n_samples)

    columns = embed_columns(graph, embed_dim, rng)
    chosen = np.empty(n_samples, dtype=np.int64)
    for t in range(n_samples):
        direction = rng.standard_normal(embed_dim)
        direction /= np.linalg.norm(direction)
        score = direction @ columns
        score[taken] = -np.inf
        j = int(np.argmax(score))
        chosen[t] = j
        taken[j] = True
    return SketchIndex(chosen, n)


def sample_mixed(
    graph: ObservedGraph,
    n_samples: int,
    urs_fraction: float,
    embed_dim: int,
    rng: np.random.Generator,
) -> SketchIndex:
    """floor(urs_fraction * N') nodes by URS, the rest by SRS over the remaining pool."""
    _check_budget(graph.n_nodes, n_samples)
    if not 0.0 <= urs_fraction <= 1.0:
        raise ValidationError(f"urs_fraction must be in [0, 1], got {urs_fraction}")
    n_urs = math.floor(urs_fraction * n_samples)
    parts = []
    uniform = np.empty(0, dtype=np.int64)
    if n_urs:
        uniform = sample_urs(graph.n_nodes, n_urs, rng).indices
        parts.append(uniform)
    if n_samples - n_urs:
        parts.append(sample_srs(graph, n_samples - n_urs, embed_dim, rng, exclude=uniform).indices)
    return SketchIndex(np.concatenate(parts), graph.n_nodes)


def draw_sketch(graph: ObservedGraph, cfg: SamplerConfig, rng: np.random.Generator) -> SketchIndex:
    """Sample cfg.n_samples nodes with the configured strategy."""
    if cfg.strategy is SamplingStrategy.URS:
        return sample_urs(graph.n_nodes, cfg.n_samples, rng)
    if cfg.strategy is SamplingStrategy.SBS:
        return sample_sbs(graph, cfg.n_samples, rng)
    if cfg.strategy is SamplingStrategy.SRS:
        return sample_srs(graph, cfg.n_samples, cfg.embed_dim, rng)
    return sample_mixed(graph, cfg.n_samples, cfg.urs_fraction, cfg.embed_dim, rng)


@dataclass(frozen=True, eq=False)
class CompletedGraph:
    """A graph with cluster-implied edges filled in, and the membership matrix U that added them."""

    base: ObservedGraph
    completion_matrix: np.ndarray = field(repr=False)  # N x r_hat, 0/1
    graph: ObservedGraph = field(repr=False)

    @property
    def r_hat(self) -> int:
        return int(self.completion_matrix.shape[1])

    @property
    def added_ones(self) -> int:
        """Entries that were not ONE in base and are ONE after completion."""
        before = self.base.states == EdgeState.ONE
        after = self.graph.states == EdgeState.ONE
        return int((after & ~before).sum())


def _unchanged(graph: ObservedGraph) -> CompletedGraph:
    return CompletedGraph(graph, np.zeros((graph.n_nodes, 0), dtype=np.int8), graph)


def precomplete(
    graph: ObservedGraph,
    budget: int,
    solver: SolverConfig,
    rng: np.random.Generator,
    idx: SketchIndex | None = None,
) -> CompletedGraph:
    """
    Fill in edges implied by a preliminary clustering.

    A uniform sketch of `budget` nodes is decomposed and clustered. Each
    node is then matched to the nearest of the zero vector and the
    sketch-cluster indicators, using its restricted adjacency row. Pairs
    of nodes matched to the same cluster become observed edges; every
    other entry keeps its state.

    Args:
        graph: Partially observed graph
        budget: Size of the preliminary sketch (capped at N)
        solver: Settings for the preliminary decomposition
        rng: Random generator for sampling and clustering
        idx: Preliminary sketch to use instead of drawing one; budget is
            then ignored

    Returns:
        CompletedGraph; unchanged with r_hat=0 when no cluster could be
        extracted

    Raises:
        SolverError: If the preliminary decomposition fails
        ValidationError: If idx belongs to another graph
    """
    n = graph.n_nodes
    if idx is not None:
        if idx.parent_size != n:
            raise ValidationError("Pre-completion sketch does not belong to this graph")
        budget = len(idx)
    budget = min(budget, n)
    if budget < 2:
        logger.warning("Pre-completion budget %d is too small; graph left unchanged", budget)
        return _unchanged(graph)

    if idx is None:
        idx = sample_urs(n, budget, rng)
    search = solve_sketch(subgraph(graph, idx), solver)
    try:
        model = extract_clusters(search.decomposition.low_rank, solver.rounding_threshold, rng)
    except ClusteringError as e:
        logger.warning("Pre-completion found no clusters (%s); graph left unchanged", e)
        return _unchanged(graph)

    restricted = graph.numeric_columns(idx.indices)
    squared = (restricted**2).sum(axis=1)
    # column 0 is the distance to the zero vector
    distances = np.empty((n, model.r_hat + 1))
    distances[:, 0] = squared
    distances[:, 1:] = squared[:, None] - 2.0 * restricted @ model.vectors.T + model.sketch_sizes
    nearest = np.argmin(distances, axis=1)

    membership = np.zeros((n, model.r_hat), dtype=np.int8)
    rows = np.flatnonzero(nearest > 0)
    membership[rows, nearest[rows] - 1] = 1

    raised = (membership.astype(np.int64) @ membership.T.astype(np.int64)) > 0
    states = graph.states.copy()
    states[raised] = EdgeState.ONE
    completed = ObservedGraph(states)
    membership.setflags(write=False)

    result = CompletedGraph(graph, membership, completed)
    logger.info(
        "Pre-completion: r_hat=%d, %d nodes assigned, %d entries raised to ONE",
        model.r_hat,
        rows.size,
        result.added_ones,
    )
    return result
