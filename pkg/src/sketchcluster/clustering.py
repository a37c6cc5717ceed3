"""Cluster extraction from a decomposed sketch and retrieval onto the full graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.cluster.vq import kmeans2

from sketchcluster.decomposition import validate_cluster_matrix
from sketchcluster.exceptions import ClusteringError, ValidationError
from sketchcluster.graph import ObservedGraph, Partition, SketchIndex

logger = logging.getLogger("sketchcluster.clustering")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """
    Clusters found in a sketch.

    vectors holds one indicator row per sketch cluster (r_hat x N'); the
    rows have disjoint supports covering every sketch node.
    """

    partition: Partition
    vectors: np.ndarray = field(repr=False)
    spectral_fallback: bool = False

    @classmethod
    def from_partition(cls, partition: Partition, spectral_fallback: bool = False) -> ClusterModel:
        labels = partition.labels
        vectors = (np.arange(partition.r)[:, None] == labels[None, :]).astype(np.float64)
        vectors.setflags(write=False)
        return cls(partition, vectors, spectral_fallback)

    @property
    def r_hat(self) -> int:
        return self.partition.r

    @property
    def sketch_sizes(self) -> np.ndarray:
        return self.partition.sizes


def _eigengap_rank(eigenvalues: np.ndarray) -> int:
    """Number of leading eigenvalues before the largest relative gap; input sorted descending, positive."""
    if eigenvalues.size == 1:
        return 1
    gaps = (eigenvalues[:-1] - eigenvalues[1:]) / eigenvalues[:-1]
    return int(np.argmax(gaps)) + 1


def extract_clusters(
    low_rank: np.ndarray,
    rounding_threshold: float = 0.5,
    rng: np.random.Generator | None = None,
) -> ClusterModel:
    """
    Read the sketch clusters off a recovered low-rank component.

    When the rounded matrix is a union of cliques those cliques are the
    clusters. Otherwise the rows of the leading eigen-embedding are grouped
    with k-means, k being set by the largest relative eigengap.

    Args:
        low_rank: Square symmetric N' x N' matrix
        rounding_threshold: Cut-off for rounding entries to 1
        rng: Generator seeding k-means++ in the fallback path

    Returns:
        ClusterModel with spectral_fallback set when the fallback was used

    Raises:
        ClusteringError: If the matrix is empty, non-finite, or has no
            positive spectrum
    """
    low_rank = np.asarray(low_rank, dtype=np.float64)
    if low_rank.ndim != 2 or low_rank.shape[0] != low_rank.shape[1] or low_rank.size == 0:
        raise ClusteringError(f"Expected a non-empty square matrix, got shape {low_rank.shape}")
    if not np.isfinite(low_rank).all():
        raise ClusteringError("Low-rank component contains non-finite entries")

    partition = validate_cluster_matrix(low_rank, rounding_threshold)
    if partition is not None:
        return ClusterModel.from_partition(partition)

    w, v = linalg.eigh(0.5 * (low_rank + low_rank.T))
    w, v = w[::-1], v[:, ::-1]
    scale = float(np.abs(w).max())
    if scale == 0.0:
        raise ClusteringError("Low-rank component is identically zero")
    positive = w > 1e-9 * scale
    if not positive.any():
        raise ClusteringError("Low-rank component has no positive eigenvalues")

    k = _eigengap_rank(w[positive])
    if k == 1:
        labels = np.zeros(low_rank.shape[0], dtype=np.int64)
    else:
        embedding = v[:, :k] * np.sqrt(w[:k])
        _, labels = kmeans2(embedding, k, minit="++", seed=rng)
    # empty k-means clusters vanish when labels are canonicalized
    partition = Partition(labels)
    logger.info("Spectral fallback extracted %d clusters (eigengap k=%d)", partition.r, k)
    return ClusterModel.from_partition(partition, spectral_fallback=True)


def retrieval_scores(graph: ObservedGraph, idx: SketchIndex, model: ClusterModel) -> np.ndarray:
    """
    Normalized correlations of every node with every sketch cluster.

    Entry (k, i) is a_k restricted to the sketch, dotted with v_i and
    divided by the sketch cluster size. Unobserved entries count as 0.

    Returns:
        N x r_hat array
    """
    if idx.parent_size != graph.n_nodes:
        raise ValidationError("Sketch index does not belong to this graph")
    if len(idx) != model.partition.n_nodes:
        raise ValidationError(
            f"Cluster model covers {model.partition.n_nodes} nodes, sketch has {len(idx)}"
        )
    restricted = graph.numeric_columns(idx.indices)
    return (restricted @ model.vectors.T) / model.sketch_sizes


def assign_from_scores(scores: np.ndarray) -> tuple[Partition, int]:
    """
    Assign each node to its highest-scoring cluster, lowest index on ties.

    Returns:
        (partition, number of nodes whose scores were all zero)
    """
    labels = np.argmax(scores, axis=1)
    uncorrelated = int((~scores.any(axis=1)).sum())
    if uncorrelated:
        logger.warning("%d nodes have zero correlation with every sketch cluster", uncorrelated)
    return Partition(labels), uncorrelated


def retrieve_full(graph: ObservedGraph, idx: SketchIndex, model: ClusterModel) -> Partition:
    """Propagate sketch clusters to every node of the graph by correlation."""
    partition, _ = assign_from_scores(retrieval_scores(graph, idx, model))
    return partition


def exact_match(a: Partition, b: Partition) -> bool:
    """True when a and b group the same nodes together, whatever the label names."""
    # Partition labels are canonical, so equality is up to relabeling
    return a.n_nodes == b.n_nodes and a == b


def reconstruct_L(partition: Partition) -> np.ndarray:  # noqa: N802
    """Binary cluster matrix: 1 where two nodes share a cluster, diagonal included."""
    labels = partition.labels
    return (labels[:, None] == labels[None, :]).astype(np.int8)


def retrieval_failure_rate_mc(
    p: float,
    q: float,
    sizes: list[int] | np.ndarray,
    trials: int,
    rng: np.random.Generator,
    own: int | None = None,
) -> float:
    """
    Monte-Carlo misassignment rate of one node under correlation retrieval.

    The node belongs to sketch cluster `own` (the smallest by default). Its
    normalized correlation with its own cluster is Binomial(n_own, p)/n_own
    and with cluster i is Binomial(n_i, q)/n_i. A trial fails when some
    other cluster scores at least as high as its own.

    Args:
        p: Intra-cluster edge probability
        q: Inter-cluster edge probability
        sizes: Sketch cluster sizes n'_i
        trials: Number of Monte-Carlo draws
        rng: Random generator
        own: Index of the node's cluster

    Returns:
        Fraction of failed trials
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.ndim != 1 or sizes.size == 0 or sizes.min() < 1:
        raise ValidationError(f"Cluster sizes must be positive, got {sizes.tolist()}")
    if not (0.0 <= q <= 1.0 and 0.0 <= p <= 1.0):
        raise ValidationError(f"p and q must be probabilities, got p={p}, q={q}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    own = int(np.argmin(sizes)) if own is None else own
    if not 0 <= own < sizes.size:
        raise ValidationError(f"own cluster {own} out of range")
    if sizes.size == 1:
        return 0.0

    self_score = rng.binomial(sizes[own], p, size=trials) / sizes[own]
    others = np.delete(sizes, own)
    cross = rng.binomial(others, q, size=(trials, others.size)) / others
    failed = (cross >= self_score[:, None]).any(axis=1)
    return float(failed.mean())
