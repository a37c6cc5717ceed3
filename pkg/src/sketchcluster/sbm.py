"""Partially observed stochastic block model graphs with planted partitions."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from sketchcluster.exceptions import ValidationError
from sketchcluster.graph import EdgeState, ObservedGraph, Partition

logger = logging.getLogger("sketchcluster.sbm")


@dataclass(frozen=True)
class SbmParams:
    """
    Stochastic block model with partial observation.

    Intra-cluster pairs are edges with probability p, inter-cluster pairs
    with probability q; every off-diagonal pair is observed with
    probability rho, independently of its edge state.
    """

    n_nodes: int
    cluster_sizes: tuple[int, ...]
    p: float
    q: float
    rho: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
        if not self.cluster_sizes or min(self.cluster_sizes) < 1:
            raise ValidationError(f"Cluster sizes must be positive, got {list(self.cluster_sizes)}")
        if sum(self.cluster_sizes) != self.n_nodes:
            raise ValidationError(
                f"Cluster sizes sum to {sum(self.cluster_sizes)}, expected n_nodes={self.n_nodes}"
            )
        if not 0.0 < self.p <= 1.0:
            raise ValidationError(f"p must be in (0, 1], got {self.p}")
        if not 0.0 <= self.q < 1.0:
            raise ValidationError(f"q must be in [0, 1), got {self.q}")
        if not 0.0 < self.rho <= 1.0:
            raise ValidationError(f"rho must be in (0, 1], got {self.rho}")
        if not self.p > 0.5 >= self.q:
            logger.warning(
                "p=%.3f, q=%.3f violate p > 1/2 >= q; the low-rank plus sparse "
                "structure is not guaranteed",
                self.p,
                self.q,
            )

    @property
    def r(self) -> int:
        return len(self.cluster_sizes)

    @property
    def n_min(self) -> int:
        return min(self.cluster_sizes)

    def with_seed(self, seed: int) -> SbmParams:
        return SbmParams(self.n_nodes, self.cluster_sizes, self.p, self.q, self.rho, seed)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["cluster_sizes"] = list(self.cluster_sizes)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> SbmParams:
        return cls(**data)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Planted partition, its ideal cluster matrix L, and where A disagrees with L."""

    partition: Partition
    low_rank: np.ndarray = field(repr=False)
    sparse_support: np.ndarray = field(repr=False)  # boolean, observed entries with A != L


def balanced_sizes(n_nodes: int, r: int) -> list[int]:
    """Split n_nodes into r clusters whose sizes differ by at most one."""
    if r < 1 or r > n_nodes:
        raise ValidationError(f"Cannot split {n_nodes} nodes into {r} clusters")
    base, extra = divmod(n_nodes, r)
    return [base + 1] * extra + [base] * (r - extra)


def unbalanced_preset(
    n_min: int,
    n_nodes: int,
    r_small: int,
    p: float = 0.8,
    q: float = 0.1,
    rho: float = 0.7,
    seed: int = 0,
) -> SbmParams:
    """
    r_small clusters of size n_min plus one cluster holding the rest.

    Raises:
        ValidationError: If n_nodes <= r_small * n_min
    """
    if n_min < 1 or r_small < 0:
        raise ValidationError(f"Invalid n_min={n_min} or r_small={r_small}")
    if n_nodes <= r_small * n_min:
        raise ValidationError(
            f"n_nodes={n_nodes} leaves no room for a large cluster after "
            f"{r_small} clusters of size {n_min}"
        )
    sizes = [n_min] * r_small + [n_nodes - r_small * n_min]
    return SbmParams(n_nodes=n_nodes, cluster_sizes=tuple(sizes), p=p, q=q, rho=rho, seed=seed)


def generate(params: SbmParams) -> tuple[ObservedGraph, GroundTruth]:
    """
    Draw a graph from the model.

    Pairs are visited in canonical (i < j, row-major) order; each pair gets
    one uniform draw for its edge state and one for its observation, from
    a PCG64 stream seeded by params.seed.

    Returns:
        (graph, ground truth)
    """
    n = params.n_nodes
    partition = Partition.from_sizes(params.cluster_sizes)
    labels = partition.labels
    rng = np.random.default_rng(params.seed)

    rows, cols = np.triu_indices(n, k=1)
    edge_draws = rng.random(rows.size)
    observe_draws = rng.random(rows.size)

    same = labels[rows] == labels[cols]
    edge = np.where(same, edge_draws < params.p, edge_draws < params.q)
    observed = observe_draws < params.rho

    states = np.full((n, n), EdgeState.UNOBSERVED, dtype=np.int8)
    upper = np.where(observed, edge.astype(np.int8), np.int8(EdgeState.UNOBSERVED))
    states[rows, cols] = upper
    states[cols, rows] = upper
    np.fill_diagonal(states, EdgeState.ONE)
    graph = ObservedGraph(states)

    low_rank = (labels[:, None] == labels[None, :]).astype(np.int8)
    sparse_support = graph.observed_mask() & (graph.numeric(np.int8) != low_rank)
    sparse_support.setflags(write=False)
    low_rank.setflags(write=False)

    logger.debug(
        "Generated SBM n=%d r=%d p=%.3f q=%.3f rho=%.3f seed=%d",
        n,
        params.r,
        params.p,
        params.q,
        params.rho,
        params.seed,
    )
    return graph, GroundTruth(partition, low_rank, sparse_support)


@dataclass(frozen=True)
class DensityEstimate:
    """Observed edge densities of a graph with respect to a partition."""

    p_hat: float
    q_hat: float
    rho_hat: float
    intra_observed: int
    inter_observed: int
    pairs: int


def empirical_densities(graph: ObservedGraph, partition: Partition) -> DensityEstimate:
    """
    Estimate p, q and rho from the off-diagonal pairs of a graph.

    p_hat and q_hat are edge fractions among observed intra- and
    inter-cluster pairs (nan when there are none); rho_hat is the observed
    fraction of all off-diagonal pairs.
    """
    if partition.n_nodes != graph.n_nodes:
        raise ValidationError("Partition and graph sizes differ")
    rows, cols = np.triu_indices(graph.n_nodes, k=1)
    values = graph.states[rows, cols]
    observed = values != EdgeState.UNOBSERVED
    same = partition.labels[rows] == partition.labels[cols]

    intra = observed & same
    inter = observed & ~same
    n_intra = int(intra.sum())
    n_inter = int(inter.sum())
    p_hat = float((values[intra] == EdgeState.ONE).mean()) if n_intra else float("nan")
    q_hat = float((values[inter] == EdgeState.ONE).mean()) if n_inter else float("nan")
    rho_hat = float(observed.mean()) if rows.size else float("nan")
    return DensityEstimate(p_hat, q_hat, rho_hat, n_intra, n_inter, int(rows.size))
