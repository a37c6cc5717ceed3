"""Tests for result dataclasses."""

import json

import numpy as np
import pytest

from sketchcluster.graph import Partition, SketchIndex
from sketchcluster.results import (
    Decomposition,
    GridResult,
    PipelineResult,
    RunLog,
    StageTimings,
)


def _decomposition():
    return Decomposition(
        low_rank=np.eye(2),
        sparse=np.zeros((2, 2)),
        lambda_used=0.25,
        iterations=12,
        converged=True,
        residual=3e-7,
        residual_history=[0.5, 3e-7],
    )


def test_run_log_dataclass():
    """Test RunLog holds one history entry."""
    log = RunLog(
        timestamp="2026-01-02T10:30:45+00:00",
        event_type="run",
        run_id="grid-0-0-0",
        payload={"success": True},
        duration_s=0.8,
        context={"seed": 1},
    )

    assert log.event_type == "run"
    assert log.payload["success"] is True
    assert log.context == {"seed": 1}


def test_decomposition_stats():
    """Test stats summarize the solve without the matrices."""
    assert _decomposition().stats() == {
        "lambda_used": 0.25,
        "iterations": 12,
        "converged": True,
        "residual": 3e-7,
    }


def test_stage_timings_total_and_rounding():
    """Test the total sums every stage and to_dict rounds to microseconds."""
    timings = StageTimings(sample=0.1234567, decompose=1.0, retrieve=0.5)

    assert timings.total == pytest.approx(1.6234567)
    data = timings.to_dict()
    assert data["sample"] == 0.123457
    assert data["precomplete"] == 0.0
    assert list(data) == ["precomplete", "sample", "decompose", "extract", "retrieve"]


def test_pipeline_result_to_dict_is_json_ready():
    """Test the flat record serializes and reports sizes."""
    result = PipelineResult(
        partition=Partition.from_sizes([3, 2]),
        sketch_index=SketchIndex([0, 3], 5),
        decomposition=_decomposition(),
        sketch_valid=True,
        r_hat=2,
        lambda_search_steps=1,
        success=True,
        strategy="sbs",
        seed=9,
    )
    data = json.loads(json.dumps(result.to_dict()))

    assert data["n_nodes"] == 5
    assert data["n_samples"] == 2
    assert data["cluster_sizes"] == [3, 2]
    assert data["decomposition"]["iterations"] == 12
    assert data["success"] is True
    assert data["uncorrelated_nodes"] == 0


def test_pipeline_result_without_decomposition():
    """Test a trivial result records no decomposition and unknown success."""
    result = PipelineResult(
        partition=Partition.from_sizes([4]),
        sketch_index=SketchIndex([1], 4),
        decomposition=None,
        sketch_valid=True,
        r_hat=1,
    )
    data = result.to_dict()

    assert data["decomposition"] is None
    assert data["success"] is None
    assert data["seed"] is None


def test_grid_result_success_rate():
    """Test success rates divide counts by trials per cell."""
    grid = GridResult(
        n_min_values=[40],
        n_prime_values=[80, 160],
        trials=4,
        strategy="urs",
        successes=np.array([[1, 4]]),
        mean_seconds=np.zeros((1, 2)),
        mean_min_sketch_size=np.zeros((1, 2)),
        mean_smallest_frequency=np.zeros((1, 2)),
    )

    assert grid.success_rate.tolist() == [[0.25, 1.0]]
    assert grid.failures == 0
