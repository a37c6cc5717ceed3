"""Output directory layout for experiment reports."""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from sketchcluster.exceptions import ReportError


@dataclass
class ReportPaths:
    """Fixed artifact locations inside an output directory."""

    out_dir: str
    grid_csv: str  # rows n_min, columns N', cell = success rate
    timing_csv: str
    diagnostics_csv: str  # balance diagnostics
    comparison_csv: str  # sketch vs full-graph success
    bounds_json: str
    config_json: str  # resolved configuration of the run
    runs_file: str  # JSON Lines run history
    residuals_dir: str  # per-solve residual traces
    partition_file: str  # run-once output


class ReportWorkspace:
    """Creates an output directory and writes report artifacts into it."""

    def __init__(self, out_dir: str | Path):
        """
        Initialize report workspace.

        Args:
            out_dir: Directory for all artifacts; created if missing

        Raises:
            ReportError: If the directories cannot be created
        """
        self.out_dir = Path(out_dir)
        self.residuals_dir = self.out_dir / "residuals"
        try:
            self.residuals_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ReportError(str(self.out_dir), f"cannot create output directory: {e}") from e

    @property
    def paths(self) -> ReportPaths:
        return ReportPaths(
            out_dir=str(self.out_dir),
            grid_csv=str(self.out_dir / "grid.csv"),
            timing_csv=str(self.out_dir / "timing.csv"),
            diagnostics_csv=str(self.out_dir / "diagnostics.csv"),
            comparison_csv=str(self.out_dir / "comparison.csv"),
            bounds_json=str(self.out_dir / "bounds.json"),
            config_json=str(self.out_dir / "config.json"),
            runs_file=str(self.out_dir / "runs.jsonl"),
            residuals_dir=str(self.residuals_dir),
            partition_file=str(self.out_dir / "partition.txt"),
        )

    def residual_log(self, run_id: str) -> str:
        """Path of the residual trace CSV for one run."""
        return str(self.residuals_dir / f"{run_id}.csv")

    def write_csv(self, path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        """
        Write a CSV file, replacing any previous content.

        Raises:
            ReportError: On I/O failure, naming the path
        """
        path = Path(path)
        try:
            with open(path, "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            raise ReportError(str(path), str(e)) from e
        return path

    def write_json(self, path: str | Path, data: dict) -> Path:
        """Write a JSON document with sorted keys."""
        path = Path(path)
        try:
            path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        except OSError as e:
            raise ReportError(str(path), str(e)) from e
        return path

    def list_artifacts(self) -> list[str]:
        """Names of the files written so far, sorted."""
        return sorted(p.name for p in self.out_dir.iterdir() if p.is_file())
