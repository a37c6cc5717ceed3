"""Command-line entry point: ``sketchcluster <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from typing import Any

from sketchcluster.clustering import reconstruct_L
from sketchcluster.config import (
    CONFIG_SECTIONS,
    LambdaMode,
    PipelineConfig,
    SamplingStrategy,
    get_preset,
    list_presets,
    load_config,
)
from sketchcluster.exceptions import ConfigError, SketchClusterError, ValidationError
from sketchcluster.experiments import (
    DEFAULT_BASELINE_CAP,
    GridSpec,
    emit_report,
    grid_bounds,
    run_balance_diagnostics,
    run_full_vs_sketch,
    run_phase_grid,
    run_timing_sweep,
)
from sketchcluster.graph import read_edge_list, read_partition, write_partition
from sketchcluster.logging import RunLogger
from sketchcluster.pipeline import run_pipeline
from sketchcluster.sbm import GroundTruth, SbmParams, balanced_sizes, generate
from sketchcluster.theory import TheoryInputs, compute_bounds
from sketchcluster.workspace import ReportWorkspace

logger = logging.getLogger("sketchcluster.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2

SECTION_DEFAULTS: dict[str, dict[str, Any]] = {
    "sbm": {"p": 0.8, "q": 0.1, "rho": 0.7, "n_nodes": 800, "r_small": 2, "r": 2, "cluster_sizes": None},
    "grid": {"n_min_values": [40, 80, 120, 160], "n_prime_values": [80, 160, 240], "trials": 20},
    "timing": {"n_values": [500, 1000, 2000], "runs": 5, "baseline_cap": DEFAULT_BASELINE_CAP},
}

# argparse dest -> (config section, key)
FLAG_TARGETS = {
    "p": ("sbm", "p"),
    "q": ("sbm", "q"),
    "rho": ("sbm", "rho"),
    "r": ("sbm", "r"),
    "n_nodes": ("sbm", "n_nodes"),
    "r_small": ("sbm", "r_small"),
    "sizes": ("sbm", "cluster_sizes"),
    "strategy": ("sampler", "strategy"),
    "n_samples": ("sampler", "n_samples"),
    "embed_dim": ("sampler", "embed_dim"),
    "urs_fraction": ("sampler", "urs_fraction"),
    "lambda_mode": ("solver", "lambda_mode"),
    "lambda_value": ("solver", "lambda_fixed_override"),
    "max_iterations": ("solver", "max_iterations"),
    "tolerance": ("solver", "tolerance"),
    "search_depth": ("solver", "search_depth"),
    "precomplete_budget": ("pipeline", "precomplete_budget"),
    "n_min": ("grid", "n_min_values"),
    "n_prime": ("grid", "n_prime_values"),
    "trials": ("grid", "trials"),
    "n_values": ("timing", "n_values"),
    "runs": ("timing", "runs"),
    "baseline_cap": ("timing", "baseline_cap"),
}


def _add_sbm_flags(parser: argparse.ArgumentParser, grid: bool = True) -> None:
    parser.add_argument("--p", type=float, help="Intra-cluster edge probability")
    parser.add_argument("--q", type=float, help="Inter-cluster edge probability")
    parser.add_argument("--rho", type=float, help="Observation probability")
    parser.add_argument("--n-nodes", type=int, help="Graph size N")
    if grid:
        parser.add_argument("--r-small", type=int, help="Number of clusters of size n_min")


def _add_sampler_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strategy", choices=[s.value for s in SamplingStrategy])
    parser.add_argument("--embed-dim", type=int, help="SRS embedding dimension m")
    parser.add_argument("--urs-fraction", type=float, help="URS share of the budget in mixed mode")
    parser.add_argument("--precomplete-budget", type=int, help="Pre-completion sketch size (0 disables)")


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda-mode", choices=[m.value for m in LambdaMode])
    parser.add_argument("--lambda", dest="lambda_value", type=float, help="Fixed or initial lambda")
    parser.add_argument("--max-iterations", type=int)
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--search-depth", type=int)


def _subcommand(sub, name: str, help_text: str) -> argparse.ArgumentParser:
    # --p is a flag of its own here, not a prefix of --preset or --parallelism
    return sub.add_parser(name, help=help_text, allow_abbrev=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchcluster",
        allow_abbrev=False,
        description="Sketch-based community detection on partially observed SBM graphs",
    )
    parser.add_argument("--config", help="JSON config file; explicit flags override it")
    parser.add_argument("--preset", help=f"Named parameter set: {', '.join(list_presets())}")
    parser.add_argument("--seed", type=int, default=0, help="Base seed (default: 0)")
    parser.add_argument("--out-dir", default="sketchcluster-out", help="Report directory")
    parser.add_argument("--trials", type=int, help="Trials per grid cell")
    parser.add_argument("--parallelism", type=int, default=1, help="Worker processes")
    parser.add_argument(
        "--log-level",
        default="warning",
        choices=["debug", "info", "warning", "error"],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    grid = _subcommand(sub, "phase-grid", "Success-rate grid over (n_min, N')")
    _add_sbm_flags(grid)
    _add_sampler_flags(grid)
    _add_solver_flags(grid)
    grid.add_argument("--n-min", type=int, nargs="+")
    grid.add_argument("--n-prime", type=int, nargs="+")

    timing = _subcommand(sub, "timing", "Sketch vs full-graph wall time over N")
    _add_sbm_flags(timing, grid=False)
    _add_sampler_flags(timing)
    _add_solver_flags(timing)
    timing.add_argument("--r", type=int, help="Number of balanced clusters")
    timing.add_argument("--n-values", type=int, nargs="+")
    timing.add_argument("--n-samples", type=int)
    timing.add_argument("--runs", type=int)
    timing.add_argument("--baseline-cap", type=int)

    balance = _subcommand(sub, "balance", "Smallest-cluster sampling diagnostics")
    _add_sbm_flags(balance)
    _add_sampler_flags(balance)
    _add_solver_flags(balance)
    balance.add_argument("--n-min", type=int, nargs="+")
    balance.add_argument("--n-samples", type=int)
    balance.add_argument(
        "--strategies",
        nargs="+",
        default=["urs", "sbs"],
        choices=[s.value for s in SamplingStrategy],
    )

    bounds = _subcommand(sub, "bounds", "Evaluate theory bounds")
    _add_sbm_flags(bounds, grid=False)
    bounds.add_argument("--r", type=int)
    bounds.add_argument("--n-min", type=int, nargs="+")
    bounds.add_argument("--n-samples", type=int)
    bounds.add_argument("--c-const", type=float, default=1.0)
    bounds.add_argument("--b", type=float, default=1.0, help="Target smallest-cluster sample count")

    once = _subcommand(sub, "run-once", "Cluster one generated graph or an edge list")
    _add_sbm_flags(once, grid=False)
    _add_sampler_flags(once)
    _add_solver_flags(once)
    once.add_argument("--r", type=int)
    once.add_argument("--sizes", type=int, nargs="+", help="Planted cluster sizes")
    once.add_argument("--n-samples", type=int)
    once.add_argument("--edge-list", help="Read the graph from this edge list instead")
    once.add_argument("--truth", help="Partition file to score an edge-list run against")
    once.add_argument("--residuals", action="store_true", help="Write solver residual traces")

    compare = _subcommand(sub, "full-vs-sketch", "Sketch vs full-graph success over n_min")
    _add_sbm_flags(compare)
    _add_sampler_flags(compare)
    _add_solver_flags(compare)
    compare.add_argument("--n-min", type=int, nargs="+")
    compare.add_argument("--n-samples", type=int)
    compare.add_argument("--baseline-cap", type=int)
    return parser


def resolve_sections(args: argparse.Namespace) -> dict[str, dict[str, Any]]:
    """
    Merge defaults, preset, config file and explicit flags, in that order.

    Raises:
        ConfigError: For unknown presets, unreadable files or unknown keys
    """
    sections: dict[str, dict[str, Any]] = {name: {} for name in CONFIG_SECTIONS}
    for name, values in SECTION_DEFAULTS.items():
        sections[name].update(values)
    layers = []
    if args.preset:
        layers.append(get_preset(args.preset))
    if args.config:
        layers.append(load_config(args.config))
    for layer in layers:
        for name, values in layer.items():
            sections[name].update(values)

    for dest, (section, key) in FLAG_TARGETS.items():
        value = getattr(args, dest, None)
        if value is not None:
            sections[section][key] = value
    if getattr(args, "n_samples", None) is None and "n_prime_values" in sections["grid"]:
        sections["sampler"].setdefault("n_samples", sections["grid"]["n_prime_values"][0])

    for name in ("sbm", "grid", "timing"):
        unknown = set(sections[name]) - set(SECTION_DEFAULTS[name])
        if unknown:
            raise ConfigError(f"Unknown keys in '{name}': {sorted(unknown)}", args.config)
    return sections


def _pipeline_config(sections: dict[str, dict[str, Any]], seed: int) -> PipelineConfig:
    pipeline = dict(sections["pipeline"])
    pipeline["sampler"] = {**sections["sampler"], "seed": seed}
    pipeline["solver"] = dict(sections["solver"])
    return PipelineConfig.from_dict(pipeline)


def _grid_spec(args: argparse.Namespace, sections: dict[str, dict[str, Any]]) -> GridSpec:
    sbm, grid = sections["sbm"], sections["grid"]
    return GridSpec(
        n_min_values=grid["n_min_values"],
        n_prime_values=grid["n_prime_values"],
        n_nodes=sbm["n_nodes"],
        r_small=sbm["r_small"],
        p=sbm["p"],
        q=sbm["q"],
        rho=sbm["rho"],
        trials=grid["trials"],
        pipeline=_pipeline_config(sections, args.seed),
        seed_base=args.seed,
        parallelism=args.parallelism,
    )


def _cmd_phase_grid(args, sections, workspace, run_logger) -> int:
    spec = _grid_spec(args, sections)
    result = run_phase_grid(spec, run_logger)
    emit_report(workspace, grid=result, bounds=grid_bounds(spec), config=sections)
    print(f"Grid written to {workspace.paths.grid_csv} ({result.failures} failed trials)")
    return EXIT_OK


def _cmd_timing(args, sections, workspace, run_logger) -> int:
    sbm, timing = sections["sbm"], sections["timing"]
    rows = run_timing_sweep(
        timing["n_values"],
        sbm["p"],
        sbm["q"],
        sbm["rho"],
        sbm["r"],
        _pipeline_config(sections, args.seed),
        runs=timing["runs"],
        baseline_cap=timing["baseline_cap"],
        seed_base=args.seed,
        run_logger=run_logger,
    )
    emit_report(workspace, timing=rows, config=sections)
    print(f"Timing written to {workspace.paths.timing_csv}")
    return EXIT_OK


def _cmd_balance(args, sections, workspace, run_logger) -> int:
    if args.n_samples is not None:
        sections["grid"]["n_prime_values"] = [args.n_samples]
    spec = _grid_spec(args, sections)
    rows = run_balance_diagnostics(spec, [SamplingStrategy(s) for s in args.strategies])
    emit_report(workspace, balance=rows, config=sections)
    print(f"Diagnostics written to {workspace.paths.diagnostics_csv}")
    return EXIT_OK


def _cmd_full_vs_sketch(args, sections, workspace, run_logger) -> int:
    if args.n_samples is not None:
        sections["grid"]["n_prime_values"] = [args.n_samples]
    spec = _grid_spec(args, sections)
    rows = run_full_vs_sketch(spec, sections["timing"]["baseline_cap"], run_logger)
    emit_report(workspace, comparison=rows, config=sections)
    print(f"Comparison written to {workspace.paths.comparison_csv}")
    return EXIT_OK


def _cmd_bounds(args, sections, workspace, run_logger) -> int:
    sbm = sections["sbm"]
    r = sbm["r"] if args.r is not None else sbm["r_small"] + 1
    n_samples = sections["sampler"].get("n_samples", 200)
    bounds = {}
    for n_min in sections["grid"]["n_min_values"]:
        inputs = TheoryInputs(
            n_nodes=sbm["n_nodes"],
            r=r,
            n_min=n_min,
            p=sbm["p"],
            q=sbm["q"],
            rho=sbm["rho"],
            n_samples=n_samples,
            c_const=args.c_const,
            b=args.b,
        )
        bounds[f"n_min={n_min},n_prime={n_samples}"] = compute_bounds(inputs)
    (path,) = emit_report(workspace, bounds=bounds)
    print(path.read_text(), end="")
    return EXIT_OK


def _cmd_run_once(args, sections, workspace, run_logger) -> int:
    sbm = sections["sbm"]
    if args.residuals:
        sections["solver"]["residual_log"] = workspace.residual_log("run-once")
    cfg = _pipeline_config(sections, args.seed)

    if args.edge_list:
        graph = read_edge_list(args.edge_list)
        truth = None
        if args.truth:
            partition = read_partition(args.truth)
            if partition.n_nodes != graph.n_nodes:
                raise ValidationError("Truth partition size does not match the edge list")
            low_rank = reconstruct_L(partition)
            support = graph.observed_mask() & (graph.numeric(low_rank.dtype) != low_rank)
            truth = GroundTruth(partition, low_rank, support)
    else:
        sizes = sbm["cluster_sizes"] or balanced_sizes(sbm["n_nodes"], sbm["r"])
        params = SbmParams(sum(sizes), tuple(sizes), sbm["p"], sbm["q"], sbm["rho"], args.seed)
        graph, truth = generate(params)

    start = time.perf_counter()
    result = run_pipeline(graph, truth, cfg, seed=args.seed)
    record = result.to_dict()
    run_logger.log_run("run-once", record, time.perf_counter() - start, {"edge_list": args.edge_list})
    write_partition(result.partition, workspace.paths.partition_file)
    workspace.write_json(workspace.paths.config_json, sections)
    print(json.dumps(record, indent=2))
    return EXIT_OK


COMMANDS = {
    "phase-grid": _cmd_phase_grid,
    "timing": _cmd_timing,
    "balance": _cmd_balance,
    "bounds": _cmd_bounds,
    "run-once": _cmd_run_once,
    "full-vs-sketch": _cmd_full_vs_sketch,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        sections = resolve_sections(args)
        workspace = ReportWorkspace(args.out_dir)
        run_logger = RunLogger(workspace.paths.runs_file)
        return COMMANDS[args.command](args, sections, workspace, run_logger)
    except ValidationError as e:
        logger.error("Configuration error: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SketchClusterError as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
