"""Low-rank plus sparse decomposition of a partially observed sketch.

Solves

    min  lam * ||S||_1 + ||L||_*   s.t.  L + S = A'  on observed entries

with an inexact augmented-Lagrangian scheme. Unobserved entries are
carried by an auxiliary block E supported off the observation mask, so
that S stays zero there and L is unconstrained there.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from sketchcluster.config import LambdaMode, SolverConfig
from sketchcluster.exceptions import (
    NoObservationsError,
    NumericalError,
    ReportError,
    ValidationError,
)
from sketchcluster.graph import ObservedGraph, Partition
from sketchcluster.results import Decomposition

logger = logging.getLogger("sketchcluster.decomposition")


def initial_lambda(sketch: ObservedGraph) -> float:
    """
    Starting weight 1/(32 sqrt(N' rho_bar)) of the lambda search.

    rho_bar is the fraction of observed off-diagonal entries of the sketch.

    Raises:
        NoObservationsError: If no off-diagonal entry is observed
    """
    rho_bar = sketch.observation_rate()
    if rho_bar <= 0.0:
        raise NoObservationsError(sketch.n_nodes)
    return 1.0 / (32.0 * math.sqrt(sketch.n_nodes * rho_bar))


def fixed_lambda(n_samples: int) -> float:
    """Weight 1/sqrt(N')."""
    if n_samples < 1:
        raise ValidationError(f"n_samples must be >= 1, got {n_samples}")
    return 1.0 / math.sqrt(n_samples)


def _soft_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def _singular_value_threshold(z: np.ndarray, tau: float) -> np.ndarray:
    # z is symmetric: singular values are |eigenvalues|
    w, v = linalg.eigh(z)
    shrunk = np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)
    keep = shrunk != 0.0
    if not keep.any():
        return np.zeros_like(z)
    vk = v[:, keep]
    return (vk * shrunk[keep]) @ vk.T


def decompose(sketch: ObservedGraph, lam: float, cfg: SolverConfig | None = None) -> Decomposition:
    """
    Split a sketch into low-rank and sparse parts.

    Args:
        sketch: N' x N' partially observed adjacency, N' >= 2
        lam: Weight of the l1 term
        cfg: Solver settings (defaults if omitted)

    Returns:
        Decomposition; converged is False when max_iterations ran out

    Raises:
        ValidationError: If lam is not a positive finite number or N' < 2
        NumericalError: If iterates stop being finite
    """
    cfg = cfg or SolverConfig()
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValidationError(f"lambda must be a positive finite number, got {lam}")
    n = sketch.n_nodes
    if n < 2:
        raise ValidationError(f"Decomposition needs at least 2 nodes, got {n}")

    a = sketch.numeric()
    omega = sketch.observed_mask()
    norm_a = float(np.linalg.norm(a))

    mu = 1.0 / float(np.linalg.norm(a, 2))
    mu_max = mu * cfg.mu_cap_factor
    low_rank = np.zeros_like(a)
    sparse = np.zeros_like(a)
    dual = np.zeros_like(a)

    history: list[float] = []
    penalties: list[float] = []
    converged = False
    residual = math.inf
    iteration = 0

    for iteration in range(1, cfg.max_iterations + 1):
        # off the mask, A' - S - E + Y/mu reduces to the previous L
        target = np.where(omega, a - sparse + dual / mu, low_rank)
        low_rank = _singular_value_threshold(0.5 * (target + target.T), 1.0 / mu)
        low_rank = 0.5 * (low_rank + low_rank.T)

        sparse = np.where(omega, _soft_threshold(a - low_rank + dual / mu, lam / mu), 0.0)
        gap = np.where(omega, a - low_rank - sparse, 0.0)
        dual = dual + mu * gap

        residual = float(np.linalg.norm(gap)) / norm_a
        if not (math.isfinite(residual) and np.isfinite(low_rank).all()):
            raise NumericalError(iteration)
        history.append(residual)
        penalties.append(mu)

        if iteration % 50 == 0:
            logger.debug("iter=%d residual=%.3e mu=%.3e lambda=%.4g", iteration, residual, mu, lam)
        # converged also bounds every observed entry, not just the norm
        if residual <= cfg.tolerance and float(np.abs(gap).max()) <= 10.0 * cfg.tolerance:
            converged = True
            break
        mu = min(mu * cfg.mu_growth, mu_max)

    if not converged:
        logger.warning(
            "Decomposition of %d-node sketch stopped at residual %.3e after %d iterations (lambda=%.4g)",
            n,
            residual,
            iteration,
            lam,
        )
    if cfg.residual_log:
        _dump_residuals(Path(cfg.residual_log), lam, history, penalties)

    return Decomposition(
        low_rank=low_rank,
        sparse=sparse,
        lambda_used=lam,
        iterations=iteration,
        converged=converged,
        residual=residual,
        residual_history=history,
    )


def _dump_residuals(path: Path, lam: float, history: list[float], penalties: list[float]) -> None:
    new_file = not path.exists()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", newline="") as f:
            writer = csv.writer(f)
            if new_file:
                writer.writerow(["lambda", "iteration", "residual", "mu"])
            for i, (res, mu) in enumerate(zip(history, penalties), start=1):
                writer.writerow([f"{lam:.10g}", i, f"{res:.10g}", f"{mu:.10g}"])
    except OSError as e:
        raise ReportError(str(path), str(e)) from e


def _round(low_rank: np.ndarray, threshold: float) -> np.ndarray:
    low_rank = np.asarray(low_rank, dtype=float)
    if low_rank.ndim != 2 or low_rank.shape[0] != low_rank.shape[1]:
        raise ValidationError(f"Expected a square matrix, got shape {low_rank.shape}")
    return low_rank > threshold


def _components(rounded: np.ndarray) -> tuple[int, np.ndarray]:
    return connected_components(csr_matrix(rounded), directed=False)


def validate_cluster_matrix(low_rank: np.ndarray, rounding_threshold: float = 0.5) -> Partition | None:
    """
    Accept a matrix whose rounding is a union of disjoint cliques.

    Entries above rounding_threshold round to 1. The rounded matrix must be
    symmetric, have a unit diagonal, and be transitively closed.

    Returns:
        The implied Partition, or None if the matrix is rejected
    """
    rounded = _round(low_rank, rounding_threshold)
    if not np.array_equal(rounded, rounded.T):
        return None
    if not rounded.diagonal().all():
        return None
    _, labels = _components(rounded)
    closure = labels[:, None] == labels[None, :]
    if not np.array_equal(rounded, closure):
        return None
    return Partition(labels)


def _closure_defect(low_rank: np.ndarray, threshold: float) -> int:
    """Entries where the rounded matrix differs from the cliques of its components."""
    rounded = _round(low_rank, threshold)
    _, labels = _components(rounded)
    closure = labels[:, None] == labels[None, :]
    return int((rounded != closure).sum())


def _wants_larger_lambda(low_rank: np.ndarray, threshold: float) -> bool:
    """
    Direction of the next bisection step.

    Fewer connected blocks than eigenvalues above the threshold means the
    rounded matrix is over-connected, so lambda goes down. A missing
    diagonal or at least as many blocks as that rank means L is too
    sparse, so lambda goes up.
    """
    rounded = _round(low_rank, threshold)
    if not rounded.diagonal().all():
        return True
    n_blocks, _ = _components(rounded)
    rank = int((linalg.eigvalsh(0.5 * (low_rank + low_rank.T)) > threshold).sum())
    return n_blocks >= rank


@dataclass
class LambdaSearchResult:
    """Decomposition chosen by the lambda search and the partition it implies."""

    decomposition: Decomposition
    partition: Partition | None
    valid: bool
    steps: int
    lambdas: list[float] = field(default_factory=list)


def _acceptable(partition: Partition | None, n_nodes: int) -> bool:
    # all-singleton rounding means L collapsed to its diagonal
    return partition is not None and (partition.r < n_nodes or n_nodes == 1)


def solve_with_lambda_search(sketch: ObservedGraph, cfg: SolverConfig | None = None) -> LambdaSearchResult:
    """
    Decompose from the initial lambda, bisecting until L is a valid cluster matrix.

    The bracket is [lam0/32, 32 lam0] and bisection is geometric. Each of
    at most search_depth steps moves the upper end down when the rounded
    L is over-connected and the lower end up otherwise.

    Returns:
        First valid result, or the attempt closest to a clique partition
        flagged valid=False
    """
    cfg = cfg or SolverConfig()
    if cfg.lambda_mode is not LambdaMode.SEARCH:
        raise ValidationError("solve_with_lambda_search requires lambda_mode='search'")

    lam = cfg.lambda_fixed_override or initial_lambda(sketch)
    lo, hi = lam / 32.0, lam * 32.0
    lambdas: list[float] = []
    best: tuple[int, Decomposition, Partition | None] | None = None

    for step in range(cfg.search_depth + 1):
        result = decompose(sketch, lam, cfg)
        lambdas.append(lam)
        partition = validate_cluster_matrix(result.low_rank, cfg.rounding_threshold)
        if _acceptable(partition, sketch.n_nodes):
            logger.info("Lambda search accepted lambda=%.4g after %d steps", lam, step)
            return LambdaSearchResult(result, partition, True, step, lambdas)

        defect = _closure_defect(result.low_rank, cfg.rounding_threshold)
        if best is None or defect < best[0]:
            best = (defect, result, partition)

        if _wants_larger_lambda(result.low_rank, cfg.rounding_threshold):
            lo = lam
        else:
            hi = lam
        lam = math.sqrt(lo * hi)

    assert best is not None
    logger.warning(
        "Lambda search found no valid cluster matrix in %d steps for a %d-node sketch",
        cfg.search_depth,
        sketch.n_nodes,
    )
    return LambdaSearchResult(best[1], best[2], False, cfg.search_depth, lambdas)


def solve_sketch(sketch: ObservedGraph, cfg: SolverConfig | None = None) -> LambdaSearchResult:
    """Decompose a sketch according to cfg.lambda_mode."""
    cfg = cfg or SolverConfig()
    if cfg.lambda_mode is LambdaMode.SEARCH:
        return solve_with_lambda_search(sketch, cfg)

    lam = cfg.lambda_fixed_override or fixed_lambda(sketch.n_nodes)
    result = decompose(sketch, lam, cfg)
    partition = validate_cluster_matrix(result.low_rank, cfg.rounding_threshold)
    valid = _acceptable(partition, sketch.n_nodes)
    if not valid:
        logger.warning("Fixed lambda=%.4g did not yield a valid cluster matrix", lam)
    return LambdaSearchResult(result, partition, valid, 0, [lam])
