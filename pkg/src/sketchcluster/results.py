"""Result types for sketchcluster."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sketchcluster.graph import Partition, SketchIndex


@dataclass
class RunLog:
    """Single entry of the JSON Lines run history."""

    timestamp: str  # ISO 8601 format
    event_type: str  # "run", "error", "info"
    run_id: str | None
    payload: dict
    duration_s: float | None
    context: dict


@dataclass
class Decomposition:
    """Low-rank and sparse components of a sketch, with solver statistics."""

    low_rank: np.ndarray = field(repr=False)
    sparse: np.ndarray = field(repr=False)
    lambda_used: float
    iterations: int
    converged: bool
    residual: float
    residual_history: list[float] = field(default_factory=list, repr=False)

    def stats(self) -> dict:
        return {
            "lambda_used": self.lambda_used,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
        }


@dataclass
class StageTimings:
    """Wall-clock seconds spent in each pipeline stage."""

    precomplete: float = 0.0
    sample: float = 0.0
    decompose: float = 0.0
    extract: float = 0.0
    retrieve: float = 0.0

    @property
    def total(self) -> float:
        return self.precomplete + self.sample + self.decompose + self.extract + self.retrieve

    def to_dict(self) -> dict:
        stages = {
            "precomplete": self.precomplete,
            "sample": self.sample,
            "decompose": self.decompose,
            "extract": self.extract,
            "retrieve": self.retrieve,
        }
        return {name: round(value, 6) for name, value in stages.items()}


@dataclass
class PipelineResult:
    """Outcome of one end-to-end clustering run."""

    partition: Partition
    sketch_index: SketchIndex
    decomposition: Decomposition | None
    sketch_valid: bool
    r_hat: int
    lambda_search_steps: int = 0
    uncorrelated_nodes: int = 0
    success: bool | None = None  # None when no ground truth was given
    timings: StageTimings = field(default_factory=StageTimings)
    strategy: str = ""
    seed: int | None = None

    def to_dict(self) -> dict:
        """Flat JSON-ready record; matrices are left out."""
        return {
            "strategy": self.strategy,
            "seed": self.seed,
            "n_nodes": self.partition.n_nodes,
            "n_samples": len(self.sketch_index),
            "r_hat": self.r_hat,
            "cluster_sizes": self.partition.sizes.tolist(),
            "sketch_valid": self.sketch_valid,
            "lambda_search_steps": self.lambda_search_steps,
            "uncorrelated_nodes": self.uncorrelated_nodes,
            "success": self.success,
            "decomposition": self.decomposition.stats() if self.decomposition else None,
            "timings": self.timings.to_dict(),
        }


@dataclass
class GridResult:
    """Per-cell outcome of a phase-transition grid; rows are n_min, columns N'."""

    n_min_values: list[int]
    n_prime_values: list[int]
    trials: int
    strategy: str
    successes: np.ndarray = field(repr=False)  # int, shape (rows, cols)
    mean_seconds: np.ndarray = field(repr=False)  # mean pipeline wall time per cell
    mean_min_sketch_size: np.ndarray = field(repr=False)
    mean_smallest_frequency: np.ndarray = field(repr=False)
    failures: int = 0  # trials that raised instead of returning

    @property
    def success_rate(self) -> np.ndarray:
        return self.successes / self.trials


@dataclass
class TimingRow:
    """Mean wall time of the sketch pipeline and the full-graph baseline at one N."""

    n_nodes: int
    runs: int
    sketch_seconds: float
    sketch_success_rate: float
    baseline_seconds: float | None = None
    baseline_success_rate: float | None = None


@dataclass
class BalanceRow:
    """Sketch balance diagnostics for one strategy at one n_min."""

    strategy: str
    n_min: int
    n_samples: int
    mean_smallest_frequency: float
    mean_min_sketch_size: float
    ideal_frequency: float  # 1/r
    ideal_min_size: float  # N'/r
    uniform_frequency: float  # n_min/N


@dataclass
class ComparisonRow:
    """Success rate of the sketch pipeline against full-graph decomposition at one n_min."""

    n_min: int
    trials: int
    sketch_success_rate: float
    full_success_rate: float | None
