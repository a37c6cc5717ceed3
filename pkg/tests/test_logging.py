"""Tests for RunLogger."""

import json
from pathlib import Path

from sketchcluster.logging import RunLogger
from sketchcluster.results import RunLog


def test_run_logger_creates_file(temp_workspace):
    """Test the history file and its parents are created."""
    path = Path(temp_workspace) / "deep" / "runs.jsonl"
    RunLogger(path)

    assert path.exists()
    assert path.read_text() == ""


def test_log_run_writes_json_line(temp_workspace):
    """Test a run entry is one JSON line with payload, duration and context."""
    path = Path(temp_workspace) / "runs.jsonl"
    run_logger = RunLogger(path)
    run_logger.log_run("grid-0-0-0", {"success": True, "r_hat": 3}, 1.5, {"seed": 7})

    (line,) = path.read_text().splitlines()
    entry = json.loads(line)
    assert entry["run_id"] == "grid-0-0-0"
    assert entry["event_type"] == "run"
    assert entry["payload"] == {"success": True, "r_hat": 3}
    assert entry["duration_s"] == 1.5
    assert entry["context"] == {"seed": 7}
    assert "T" in entry["timestamp"]


def test_get_logs_most_recent_first(temp_workspace):
    """Test get_logs returns RunLog entries newest first and honors limit."""
    run_logger = RunLogger(Path(temp_workspace) / "runs.jsonl")
    run_logger.log_info("start")
    run_logger.log_run("a", {"success": False})
    run_logger.log_error("SolverError: diverged", run_id="b")

    logs = run_logger.get_logs()
    assert [log.event_type for log in logs] == ["error", "run", "info"]
    assert isinstance(logs[0], RunLog)
    assert logs[0].payload == {"error": "SolverError: diverged"}
    assert logs[2].payload == {"message": "start"}
    assert len(run_logger.get_logs(limit=2)) == 2


def test_get_logs_filters(temp_workspace):
    """Test filtering by event type and run id."""
    run_logger = RunLogger(Path(temp_workspace) / "runs.jsonl")
    run_logger.log_run("a", {})
    run_logger.log_run("b", {})
    run_logger.log_error("boom", run_id="a")

    assert [log.run_id for log in run_logger.get_logs(event_type="run")] == ["b", "a"]
    assert [log.event_type for log in run_logger.get_logs(run_id="a")] == ["error", "run"]


def test_get_logs_skips_malformed_lines(temp_workspace):
    """Test blank and non-JSON lines are ignored."""
    path = Path(temp_workspace) / "runs.jsonl"
    run_logger = RunLogger(path)
    run_logger.log_info("ok")
    with open(path, "a") as f:
        f.write("\nnot json\n")

    assert len(run_logger.get_logs()) == 1


def test_clear_logs(temp_workspace):
    """Test clear_logs empties the history but keeps the file."""
    path = Path(temp_workspace) / "runs.jsonl"
    run_logger = RunLogger(path)
    run_logger.log_info("x")
    run_logger.clear_logs()

    assert path.exists()
    assert run_logger.get_logs() == []


def test_get_stats(temp_workspace):
    """Test stats count events per type, durations and successful runs."""
    run_logger = RunLogger(Path(temp_workspace) / "runs.jsonl")
    run_logger.log_run("a", {"success": True}, 2.0)
    run_logger.log_run("b", {"success": False}, 0.5)
    run_logger.log_run("c", {"success": None})
    run_logger.log_error("boom")

    stats = run_logger.get_stats()
    assert stats["total_events"] == 4
    assert stats["events_by_type"] == {"run": 3, "error": 1}
    assert stats["total_duration_s"] == 2.5
    assert stats["successes"] == 1
