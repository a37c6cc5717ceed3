"""Structured run history for sketchcluster experiments."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

from sketchcluster.exceptions import ReportError
from sketchcluster.results import RunLog


class RunLogger:
    """JSON Lines log of pipeline runs, errors and notes."""

    def __init__(self, history_file: str | Path):
        """
        Initialize run logger.

        Args:
            history_file: Path to runs.jsonl file
        """
        self.history_file = Path(history_file)
        self._ensure_file_exists()

    def _ensure_file_exists(self):
        try:
            self.history_file.parent.mkdir(parents=True, exist_ok=True)
            self.history_file.touch(exist_ok=True)
        except OSError as e:
            raise ReportError(str(self.history_file), str(e)) from e

    def log_run(
        self,
        run_id: str,
        payload: dict,
        duration_s: float | None = None,
        context: dict | None = None,
    ):
        """
        Log a completed pipeline run.

        Args:
            run_id: Identifier of the run, e.g. "cell-1-2-trial-7"
            payload: PipelineResult.to_dict() or a similar flat record
            duration_s: Wall time in seconds
            context: Extra context (grid cell, strategy, seed)
        """
        self._write_log(self._entry("run", run_id, payload, duration_s, context))

    def log_error(self, error: str, context: dict | None = None, run_id: str | None = None):
        """Log a run that raised instead of returning."""
        self._write_log(self._entry("error", run_id, {"error": error}, None, context))

    def log_info(self, message: str, context: dict | None = None, run_id: str | None = None):
        self._write_log(self._entry("info", run_id, {"message": message}, None, context))

    @staticmethod
    def _entry(
        event_type: str,
        run_id: str | None,
        payload: dict,
        duration_s: float | None,
        context: dict | None,
    ) -> dict:
        return {
            "run_id": run_id,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "event_type": event_type,
            "payload": payload,
            "duration_s": duration_s,
            "context": context or {},
        }

    def _write_log(self, log_entry: dict):
        try:
            with open(self.history_file, "a") as f:
                f.write(json.dumps(log_entry) + "\n")
        except OSError as e:
            raise ReportError(str(self.history_file), str(e)) from e

    def get_logs(
        self,
        limit: int | None = None,
        event_type: str | None = None,
        run_id: str | None = None,
    ) -> list[RunLog]:
        """
        Retrieve logs with optional filtering.

        Args:
            limit: Maximum number of logs to return (most recent first)
            event_type: Filter by event type (run, error, info)
            run_id: Filter by run ID

        Returns:
            List of RunLog instances
        """
        if not self.history_file.exists():
            return []

        logs = []
        with open(self.history_file) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    # Skip malformed lines
                    continue

                if event_type and entry.get("event_type") != event_type:
                    continue
                if run_id and entry.get("run_id") != run_id:
                    continue

                logs.append(
                    RunLog(
                        timestamp=entry["timestamp"],
                        event_type=entry["event_type"],
                        run_id=entry.get("run_id"),
                        payload=entry.get("payload", {}),
                        duration_s=entry.get("duration_s"),
                        context=entry.get("context", {}),
                    )
                )

        logs.reverse()
        if limit:
            return logs[:limit]
        return logs

    def clear_logs(self):
        """Clear all logs from history file."""
        if self.history_file.exists():
            self.history_file.unlink()
        self._ensure_file_exists()

    def get_stats(self) -> dict:
        """
        Get statistics about logged runs.

        Returns:
            Dictionary with total_events, events_by_type, total_duration_s,
            and successes (run entries whose payload has success=True)
        """
        logs = self.get_logs()

        events_by_type: dict[str, int] = {}
        total_duration_s = 0.0
        successes = 0

        for log in logs:
            events_by_type[log.event_type] = events_by_type.get(log.event_type, 0) + 1
            if log.duration_s:
                total_duration_s += log.duration_s
            if log.event_type == "run" and log.payload.get("success") is True:
                successes += 1

        return {
            "total_events": len(logs),
            "events_by_type": events_by_type,
            "total_duration_s": total_duration_s,
            "successes": successes,
        }
