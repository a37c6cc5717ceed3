"""Tri-state adjacency storage, partitions, and sketch index sets.

Node ids are 0-based everywhere in the library. Files written and read by
this module use 1-based ids; the conversion happens only here.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from sketchcluster.exceptions import EdgeListParseError, ReportError, ValidationError

logger = logging.getLogger("sketchcluster.graph")

_HEADER_NODES = re.compile(r"^#\s*nodes\s*=\s*(\d+)\s*$")
_HEADER_DEFAULT = re.compile(r"^#\s*default\s*=\s*(unobserved|zero)\s*$")


class EdgeState(IntEnum):
    """Observation state of a node pair."""

    UNOBSERVED = -1
    ZERO = 0
    ONE = 1


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ObservedGraph:
    """
    Symmetric N x N adjacency with observed-one, observed-zero and unobserved entries.

    The diagonal is always observed-one. Instances are immutable; the state
    array is stored read-only and may be shared between threads.
    """

    states: np.ndarray

    def __post_init__(self):
        states = np.array(self.states, dtype=np.int8, copy=True)
        if states.ndim != 2 or states.shape[0] != states.shape[1] or states.shape[0] == 0:
            raise ValidationError(f"Adjacency must be a non-empty square matrix, got {states.shape}")
        if not np.isin(states, (-1, 0, 1)).all():
            raise ValidationError("Adjacency entries must be -1 (unobserved), 0 or 1")
        if not np.array_equal(states, states.T):
            raise ValidationError("Adjacency must be symmetric")
        if not (np.diagonal(states) == EdgeState.ONE).all():
            raise ValidationError("Diagonal entries must be observed ones")
        object.__setattr__(self, "states", _readonly(states))

    @classmethod
    def from_matrix(cls, values: np.ndarray, observed: np.ndarray | None = None) -> ObservedGraph:
        """
        Build a graph from a 0/1 matrix and an optional observation mask.

        The diagonal is forced to observed-one.

        Args:
            values: Symmetric matrix; nonzero means edge
            observed: Symmetric boolean mask (default: everything observed)

        Returns:
            ObservedGraph
        """
        values = np.asarray(values)
        states = (values != 0).astype(np.int8)
        if observed is not None:
            states[~np.asarray(observed, dtype=bool)] = EdgeState.UNOBSERVED
        np.fill_diagonal(states, EdgeState.ONE)
        return cls(states)

    @classmethod
    def empty(cls, n_nodes: int, unobserved: bool = False) -> ObservedGraph:
        """Graph with no edges; off-diagonal pairs unobserved or observed-zero."""
        if n_nodes < 1:
            raise ValidationError(f"n_nodes must be positive, got {n_nodes}")
        fill = EdgeState.UNOBSERVED if unobserved else EdgeState.ZERO
        states = np.full((n_nodes, n_nodes), fill, dtype=np.int8)
        np.fill_diagonal(states, EdgeState.ONE)
        return cls(states)

    @property
    def n_nodes(self) -> int:
        return int(self.states.shape[0])

    def entry(self, i: int, j: int) -> EdgeState:
        self._check_node(i)
        self._check_node(j)
        return EdgeState(int(self.states[i, j]))

    def observed_mask(self) -> np.ndarray:
        """Boolean mask of observed entries (diagonal included)."""
        return self.states != EdgeState.UNOBSERVED

    def numeric(self, dtype=np.float64) -> np.ndarray:
        """0/1 matrix with unobserved entries read as zero."""
        return (self.states == EdgeState.ONE).astype(dtype)

    def numeric_columns(self, columns: np.ndarray, dtype=np.float64) -> np.ndarray:
        """N x len(columns) slice of numeric() without building the full matrix."""
        return (self.states[:, columns] == EdgeState.ONE).astype(dtype)

    def observation_rate(self) -> float:
        """Fraction of observed off-diagonal entries."""
        n = self.n_nodes
        if n < 2:
            return 0.0
        observed_off = int(self.observed_mask().sum()) - n
        return observed_off / (n * (n - 1))

    def degrees_l0(self) -> np.ndarray:
        """Observed-one count of every column, diagonal included."""
        return (self.states == EdgeState.ONE).sum(axis=0).astype(np.int64)

    def _check_node(self, j: int) -> None:
        if not 0 <= j < self.n_nodes:
            raise ValidationError(f"Node {j} out of range for {self.n_nodes}-node graph")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ObservedGraph):
            return NotImplemented
        return np.array_equal(self.states, other.states)

    def __hash__(self) -> int:
        return hash(self.states.tobytes())


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Assignment of nodes to disjoint, non-empty clusters.

    Labels are canonicalized on construction: clusters are numbered
    0..r-1 in order of their first node. Two partitions that differ only
    by a relabeling therefore compare equal.
    """

    labels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.labels)
        if raw.ndim != 1 or raw.size == 0:
            raise ValidationError("Partition labels must be a non-empty 1-D sequence")
        _, first_index, inverse = np.unique(raw, return_index=True, return_inverse=True)
        # renumber by first occurrence
        order = np.argsort(first_index, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        object.__setattr__(self, "labels", _readonly(rank[inverse.ravel()].astype(np.int64)))

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> Partition:
        return cls(np.fromiter(labels, dtype=np.int64))

    @classmethod
    def from_sizes(cls, sizes: Iterable[int]) -> Partition:
        """Contiguous blocks: the first sizes[0] nodes form cluster 0, and so on."""
        sizes = [int(s) for s in sizes]
        if not sizes or min(sizes) < 1:
            raise ValidationError(f"Cluster sizes must be positive, got {sizes}")
        return cls(np.repeat(np.arange(len(sizes)), sizes))

    @property
    def n_nodes(self) -> int:
        return int(self.labels.size)

    @property
    def r(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.r)

    @property
    def n_min(self) -> int:
        return int(self.sizes.min())

    def members(self, cluster: int) -> np.ndarray:
        """Node ids of one cluster, increasing."""
        return np.flatnonzero(self.labels == cluster)

    def restrict(self, idx: SketchIndex) -> Partition:
        """Partition induced on the sketch nodes, in sketch order."""
        if idx.parent_size != self.n_nodes:
            raise ValidationError(
                f"Sketch index over {idx.parent_size} nodes does not fit a "
                f"{self.n_nodes}-node partition"
            )
        return Partition(self.labels[idx.indices])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash(self.labels.tobytes())

    def __repr__(self) -> str:
        return f"Partition(n_nodes={self.n_nodes}, r={self.r}, sizes={self.sizes.tolist()})"


@dataclass(frozen=True, eq=False)
class SketchIndex:
    """Strictly increasing set of sampled node ids drawn from a graph of parent_size nodes."""

    indices: np.ndarray
    parent_size: int

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64).ravel()
        if self.parent_size < 1:
            raise ValidationError(f"parent_size must be positive, got {self.parent_size}")
        if indices.size == 0:
            raise ValidationError("A sketch needs at least one node")
        if indices.min() < 0 or indices.max() >= self.parent_size:
            raise ValidationError(f"Sketch indices out of range [0, {self.parent_size})")
        ordered = np.unique(indices)
        if ordered.size != indices.size:
            raise ValidationError("Sketch indices must be distinct")
        object.__setattr__(self, "indices", _readonly(ordered))

    @classmethod
    def full(cls, n_nodes: int) -> SketchIndex:
        return cls(np.arange(n_nodes), n_nodes)

    def compose(self, relative: SketchIndex) -> SketchIndex:
        """Index set selected by `relative`, a sketch of this sketch."""
        if relative.parent_size != len(self):
            raise ValidationError("Relative index does not match this sketch's size")
        return SketchIndex(self.indices[relative.indices], self.parent_size)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SketchIndex):
            return NotImplemented
        return self.parent_size == other.parent_size and np.array_equal(
            self.indices, other.indices
        )

    def __hash__(self) -> int:
        return hash((self.parent_size, self.indices.tobytes()))


def subgraph(graph: ObservedGraph, idx: SketchIndex) -> ObservedGraph:
    """
    Principal sub-matrix of the graph on the sampled nodes.

    Args:
        graph: Full graph
        idx: Sampled node ids

    Returns:
        N' x N' graph with tri-state values copied verbatim

    Raises:
        ValidationError: If the index was drawn from a different graph size
    """
    if idx.parent_size != graph.n_nodes:
        raise ValidationError(
            f"Sketch index over {idx.parent_size} nodes used on a {graph.n_nodes}-node graph"
        )
    return ObservedGraph(graph.states[np.ix_(idx.indices, idx.indices)])


def degree_l0(graph: ObservedGraph, j: int) -> int:
    """Number of observed ones in column j, diagonal included (always >= 1)."""
    graph._check_node(j)
    return int((graph.states[:, j] == EdgeState.ONE).sum())


def read_edge_list(
    path: str | Path,
    n_nodes: int | None = None,
    default_unobserved: bool | None = None,
) -> ObservedGraph:
    """
    Read a graph from an edge-list file.

    Lines are "i j s" with 1-based node ids and s in {0, 1}. Lines starting
    with "#" are comments, except the headers "# nodes=N" and
    "# default=unobserved|zero".

    Args:
        path: File to read
        n_nodes: Node count; taken from the header when omitted
        default_unobserved: State of unlisted pairs (True: unobserved,
            False: observed-zero). Taken from the header when omitted,
            falling back to observed-zero.

    Returns:
        ObservedGraph

    Raises:
        EdgeListParseError: On malformed lines, out-of-range ids, conflicting
            duplicate pairs, or a node header disagreeing with n_nodes
    """
    path = Path(path)
    header_nodes: int | None = None
    header_line = 0
    header_default: bool | None = None
    entries: dict[tuple[int, int], tuple[int, int]] = {}

    with open(path, encoding="utf-8") as f:
        lines = list(enumerate(f, start=1))

    for line_number, line in lines:
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            match = _HEADER_NODES.match(text)
            if match:
                header_nodes = int(match.group(1))
                header_line = line_number
            match = _HEADER_DEFAULT.match(text)
            if match:
                header_default = match.group(1) == "unobserved"
            continue

        parts = text.split()
        if len(parts) != 3:
            raise EdgeListParseError(str(path), line_number, f"expected 'i j state', got {text!r}")
        try:
            i, j, state = (int(p) for p in parts)
        except ValueError:
            raise EdgeListParseError(str(path), line_number, f"non-integer field in {text!r}")
        if state not in (0, 1):
            raise EdgeListParseError(str(path), line_number, f"state must be 0 or 1, got {state}")
        if i == j and state == 0:
            raise EdgeListParseError(str(path), line_number, "diagonal entries are always 1")

        key = (min(i, j), max(i, j))
        previous = entries.get(key)
        if previous is not None and previous[0] != state:
            raise EdgeListParseError(
                str(path),
                line_number,
                f"pair ({key[0]}, {key[1]}) conflicts with line {previous[1]}",
            )
        entries[key] = (state, line_number)

    if n_nodes is not None and header_nodes is not None and n_nodes != header_nodes:
        raise EdgeListParseError(
            str(path), header_line, f"header declares {header_nodes} nodes, caller expects {n_nodes}"
        )
    size = n_nodes if n_nodes is not None else header_nodes
    if size is None:
        raise EdgeListParseError(str(path), 0, "node count missing: no '# nodes=N' header")
    if default_unobserved is None:
        default_unobserved = bool(header_default)

    graph_states = np.full(
        (size, size),
        EdgeState.UNOBSERVED if default_unobserved else EdgeState.ZERO,
        dtype=np.int8,
    )
    for (i, j), (state, line_number) in entries.items():
        if not (1 <= i <= size and 1 <= j <= size):
            raise EdgeListParseError(
                str(path), line_number, f"node id out of range [1, {size}]: ({i}, {j})"
            )
        graph_states[i - 1, j - 1] = state
        graph_states[j - 1, i - 1] = state
    np.fill_diagonal(graph_states, EdgeState.ONE)

    logger.debug("Read %d pairs over %d nodes from %s", len(entries), size, path)
    return ObservedGraph(graph_states)


def write_edge_list(graph: ObservedGraph, path: str | Path) -> None:
    """
    Write every observed off-diagonal pair as "i j s" with i < j.

    Unobserved pairs are omitted and the file declares
    "# default=unobserved", so read_edge_list(path) returns the same graph.

    Raises:
        ReportError: If the file cannot be written
    """
    path = Path(path)
    rows, cols = np.triu_indices(graph.n_nodes, k=1)
    values = graph.states[rows, cols]
    keep = values != EdgeState.UNOBSERVED

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# nodes={graph.n_nodes}\n")
            f.write("# default=unobserved\n")
            for i, j, s in zip(rows[keep], cols[keep], values[keep]):
                f.write(f"{i + 1} {j + 1} {s}\n")
    except OSError as e:
        raise ReportError(str(path), str(e)) from e


def write_partition(partition: Partition, path: str | Path) -> None:
    """Write one "node_id cluster_id" line per node, both 1-based."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for node, label in enumerate(partition.labels, start=1):
                f.write(f"{node} {label + 1}\n")
    except OSError as e:
        raise ReportError(str(path), str(e)) from e


def read_partition(path: str | Path) -> Partition:
    """Read a partition written by write_partition."""
    path = Path(path)
    assignments: dict[int, int] = {}
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListParseError(str(path), line_number, f"expected 'node cluster', got {text!r}")
            try:
                node, cluster = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(str(path), line_number, f"non-integer field in {text!r}")
            if node in assignments:
                raise EdgeListParseError(str(path), line_number, f"node {node} assigned twice")
            assignments[node] = cluster

    n = len(assignments)
    if sorted(assignments) != list(range(1, n + 1)):
        raise EdgeListParseError(str(path), 0, "node ids must cover 1..N exactly once")
    return Partition.from_labels(assignments[k] for k in range(1, n + 1))
