"""Tests for the sketchcluster command line."""

import csv
import json
from pathlib import Path

import pytest

from sketchcluster.cli import EXIT_CONFIG, EXIT_ERROR, EXIT_OK, build_parser, main, resolve_sections
from sketchcluster.exceptions import ConfigError
from sketchcluster.graph import Partition, read_partition, write_edge_list, write_partition
from tests.conftest import clique_graph


def _run(out_dir, *argv):
    return main(["--out-dir", str(out_dir), *argv])


def test_bounds_prints_json(temp_workspace, capsys):
    """Test the bounds command prints and writes one bound set per n_min."""
    code = _run(temp_workspace, "bounds", "--n-min", "40", "80", "--n-samples", "120")

    assert code == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert set(printed) == {"n_min=40,n_prime=120", "n_min=80,n_prime=120"}
    assert printed["n_min=40,n_prime=120"]["gamma"] == pytest.approx(0.6)
    on_disk = json.loads((Path(temp_workspace) / "bounds.json").read_text())
    assert on_disk == printed


def test_bounds_uses_preset(temp_workspace, capsys):
    """Test a preset supplies the grid and the sketch size."""
    code = _run(temp_workspace, "--preset", "desk-fig2", "bounds")

    assert code == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert sorted(printed) == sorted(f"n_min={n},n_prime=160" for n in (40, 80, 120, 160))


def test_run_once_generated_graph(temp_workspace, capsys):
    """Test run-once clusters a generated graph and writes its artifacts."""
    code = _run(
        temp_workspace,
        "--seed",
        "3",
        "run-once",
        "--n-nodes",
        "120",
        "--r",
        "3",
        "--n-samples",
        "60",
        "--p",
        "0.95",
        "--q",
        "0.02",
        "--rho",
        "0.9",
    )

    assert code == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["n_nodes"] == 120
    assert record["n_samples"] == 60
    assert record["seed"] == 3
    assert read_partition(Path(temp_workspace) / "partition.txt").n_nodes == 120
    config = json.loads((Path(temp_workspace) / "config.json").read_text())
    assert config["sbm"]["p"] == 0.95
    runs = (Path(temp_workspace) / "runs.jsonl").read_text().splitlines()
    assert len(runs) == 1


def test_run_once_edge_list_with_truth(temp_workspace, capsys):
    """Test run-once reads an edge list and scores it against a partition file."""
    graph_path = Path(temp_workspace) / "graph.txt"
    truth_path = Path(temp_workspace) / "truth.txt"
    write_edge_list(clique_graph([6, 6, 6]), graph_path)
    write_partition(Partition.from_sizes([6, 6, 6]), truth_path)

    code = _run(
        Path(temp_workspace) / "out",
        "run-once",
        "--edge-list",
        str(graph_path),
        "--truth",
        str(truth_path),
        "--n-samples",
        "12",
        "--lambda-mode",
        "fixed",
        "--lambda",
        "1.5",
        "--residuals",
    )

    assert code == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["success"] is True
    assert record["r_hat"] == 3
    assert (Path(temp_workspace) / "out" / "residuals" / "run-once.csv").exists()


def test_run_once_truth_size_mismatch(temp_workspace):
    """Test a partition file of the wrong size is a usage error."""
    graph_path = Path(temp_workspace) / "graph.txt"
    truth_path = Path(temp_workspace) / "truth.txt"
    write_edge_list(clique_graph([4, 4]), graph_path)
    write_partition(Partition.from_sizes([4, 3]), truth_path)

    code = _run(temp_workspace, "run-once", "--edge-list", str(graph_path), "--truth", str(truth_path))
    assert code == EXIT_CONFIG


def test_run_once_bad_edge_list(temp_workspace, capsys):
    """Test a malformed edge list exits with the generic error code."""
    graph_path = Path(temp_workspace) / "graph.txt"
    graph_path.write_text("# nodes=3\n1 2 9\n")

    code = _run(temp_workspace, "run-once", "--edge-list", str(graph_path))

    assert code == EXIT_ERROR
    assert "state must be 0 or 1" in capsys.readouterr().err


def test_phase_grid_writes_report(temp_workspace):
    """Test phase-grid writes the grid, its bounds and the resolved config."""
    code = _run(
        temp_workspace,
        "--trials",
        "1",
        "phase-grid",
        "--n-nodes",
        "200",
        "--n-min",
        "50",
        "--n-prime",
        "60",
        "--p",
        "0.9",
        "--q",
        "0.05",
        "--rho",
        "0.9",
    )

    assert code == EXIT_OK
    with open(Path(temp_workspace) / "grid.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["n_min", "60"]
    assert rows[1][0] == "50"
    assert {"grid.csv", "bounds.json", "config.json", "runs.jsonl"} <= set(
        p.name for p in Path(temp_workspace).iterdir()
    )


def test_unknown_preset_exit_code(temp_workspace, capsys):
    """Test an unknown preset is a configuration error."""
    code = _run(temp_workspace, "--preset", "no-such-preset", "bounds")

    assert code == EXIT_CONFIG
    assert "Unknown preset" in capsys.readouterr().err


def test_bad_config_file_exit_code(temp_workspace):
    """Test unreadable JSON and unknown keys exit with code 2."""
    bad_json = Path(temp_workspace) / "bad.json"
    bad_json.write_text("{not json")
    unknown_key = Path(temp_workspace) / "unknown.json"
    unknown_key.write_text(json.dumps({"sbm": {"colour": "blue"}}))

    assert _run(temp_workspace, "--config", str(bad_json), "bounds") == EXIT_CONFIG
    assert _run(temp_workspace, "--config", str(unknown_key), "bounds") == EXIT_CONFIG


def test_invalid_parameter_exit_code(temp_workspace):
    """Test an out-of-range probability is reported as a configuration error."""
    assert _run(temp_workspace, "bounds", "--p", "1.5") == EXIT_CONFIG


def test_resolve_sections_precedence(temp_workspace):
    """Test flags override the config file, which overrides the preset."""
    path = Path(temp_workspace) / "config.json"
    path.write_text(json.dumps({"sbm": {"p": 0.7, "q": 0.2}, "solver": {"search_depth": 3}}))
    args = build_parser().parse_args(
        ["--preset", "desk-fig2", "--config", str(path), "phase-grid", "--p", "0.9"]
    )
    sections = resolve_sections(args)

    assert sections["sbm"]["p"] == 0.9
    assert sections["sbm"]["q"] == 0.2
    assert sections["sbm"]["rho"] == 0.7
    assert sections["sbm"]["n_nodes"] == 800
    assert sections["solver"] == {"search_depth": 3}
    assert sections["sampler"]["n_samples"] == 160


def test_resolve_sections_sketch_size_from_grid():
    """Test the sketch size defaults to the first N' of the grid."""
    args = build_parser().parse_args(["phase-grid", "--n-prime", "120", "240"])
    sections = resolve_sections(args)

    assert sections["sampler"]["n_samples"] == 120
    assert sections["grid"]["n_prime_values"] == [120, 240]


def test_resolve_sections_unknown_grid_key(temp_workspace):
    """Test unknown keys in a harness section are rejected."""
    path = Path(temp_workspace) / "config.json"
    path.write_text(json.dumps({"grid": {"cells": 4}}))
    args = build_parser().parse_args(["--config", str(path), "phase-grid"])

    with pytest.raises(ConfigError, match="cells"):
        resolve_sections(args)


@pytest.mark.parametrize("command", ["phase-grid", "timing", "balance", "bounds", "run-once", "full-vs-sketch"])
def test_short_sbm_flags_are_not_prefixes(command):
    """Test --p and --r parse as their own flags next to --preset, --parallelism and --rho."""
    args = build_parser().parse_args(["--parallelism", "2", command, "--p", "0.9", "--rho", "0.5"])

    assert args.p == 0.9
    assert args.rho == 0.5
    assert args.parallelism == 2
    assert args.preset is None


def test_abbreviated_global_flag_is_rejected():
    """Test a truncated global flag is an error instead of a silent prefix match."""
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--pres", "desk-fig2", "bounds"])
