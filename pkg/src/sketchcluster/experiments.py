"""
Experiment harness: phase-transition grids, timing sweeps, balance
diagnostics and sketch-versus-full comparisons, plus report emission.

Every trial derives its seed from (seed_base, cell, trial) through a
SeedSequence spawn key, and results are reduced by task index, so
parallel and sequential runs produce identical reports.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sketchcluster.config import PipelineConfig, SamplingStrategy
from sketchcluster.exceptions import SketchClusterError, ValidationError
from sketchcluster.graph import Partition, SketchIndex
from sketchcluster.logging import RunLogger
from sketchcluster.pipeline import run_full_decomposition, run_pipeline, stage_rngs
from sketchcluster.results import BalanceRow, ComparisonRow, GridResult, TimingRow
from sketchcluster.sampling import draw_sketch, precomplete
from sketchcluster.sbm import SbmParams, balanced_sizes, generate, unbalanced_preset
from sketchcluster.theory import TheoryBounds, TheoryInputs, compute_bounds
from sketchcluster.workspace import ReportWorkspace

logger = logging.getLogger("sketchcluster.experiments")

DEFAULT_BASELINE_CAP = 2000


@dataclass
class GridSpec:
    """
    Phase-transition grid over (n_min, N').

    Each cell draws graphs with r_small clusters of size n_min and one
    large cluster holding the remaining nodes.
    """

    n_min_values: list[int]
    n_prime_values: list[int]
    n_nodes: int = 800
    r_small: int = 2
    p: float = 0.8
    q: float = 0.1
    rho: float = 0.7
    trials: int = 20
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    seed_base: int = 0
    parallelism: int = 1

    def __post_init__(self):
        if isinstance(self.pipeline, dict):
            self.pipeline = PipelineConfig.from_dict(self.pipeline)
        self.n_min_values = [int(v) for v in self.n_min_values]
        self.n_prime_values = [int(v) for v in self.n_prime_values]
        if not self.n_min_values or not self.n_prime_values:
            raise ValidationError("Grid needs at least one n_min and one N' value")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.parallelism < 1:
            raise ValidationError(f"parallelism must be >= 1, got {self.parallelism}")
        for n_min in self.n_min_values:
            # validates n_nodes, r_small and probabilities up front
            self.params(n_min, 0)

    @property
    def r(self) -> int:
        return self.r_small + 1

    def params(self, n_min: int, seed: int) -> SbmParams:
        return unbalanced_preset(n_min, self.n_nodes, self.r_small, self.p, self.q, self.rho, seed)

    def with_n_samples(self, n_samples: int) -> PipelineConfig:
        sampler = {**self.pipeline.sampler.to_dict(), "n_samples": n_samples}
        return PipelineConfig(
            sampler=sampler,
            solver=self.pipeline.solver,
            precomplete_budget=self.pipeline.precomplete_budget,
            record_timings=self.pipeline.record_timings,
        )


def trial_seed(seed_base: int, *key: int) -> int:
    """Deterministic 32-bit seed for one trial of one cell."""
    sequence = np.random.SeedSequence(entropy=seed_base, spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1)[0])


def sketch_balance(truth: Partition, idx: SketchIndex) -> tuple[int, float]:
    """
    Smallest per-cluster sample count and the sampled share of the smallest cluster.

    The smallest cluster is the first one of minimal size.
    """
    counts = np.bincount(truth.labels[idx.indices], minlength=truth.r)
    smallest = int(np.argmin(truth.sizes))
    return int(counts.min()), counts[smallest] / len(idx)


@dataclass(frozen=True)
class _Trial:
    params: SbmParams
    cfg: PipelineConfig
    seed: int
    run_id: str
    full_baseline: bool = False


def _run_trial(task: _Trial) -> dict:
    try:
        graph, truth = generate(task.params)
        start = time.perf_counter()
        if task.full_baseline:
            result = run_full_decomposition(graph, truth, task.cfg.solver, seed=task.seed)
        else:
            result = run_pipeline(graph, truth, task.cfg, seed=task.seed)
        seconds = time.perf_counter() - start
    except (SketchClusterError, np.linalg.LinAlgError) as e:
        return {"run_id": task.run_id, "error": f"{type(e).__name__}: {e}", "success": False}
    min_size, frequency = sketch_balance(truth.partition, result.sketch_index)
    return {
        "run_id": task.run_id,
        "error": None,
        "success": bool(result.success),
        "seconds": seconds,
        "min_sketch_size": min_size,
        "smallest_frequency": frequency,
        "record": result.to_dict(),
    }


def _execute(tasks: Sequence[_Trial], parallelism: int, run_logger: RunLogger | None) -> list[dict]:
    if parallelism > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            # map keeps submission order
            outcomes = list(pool.map(_run_trial, tasks))
    else:
        outcomes = [_run_trial(task) for task in tasks]

    if run_logger is not None:
        for task, outcome in zip(tasks, outcomes):
            context = {"seed": task.seed, "n_min": task.params.n_min}
            if outcome["error"]:
                run_logger.log_error(outcome["error"], context=context, run_id=task.run_id)
            else:
                run_logger.log_run(task.run_id, outcome["record"], outcome["seconds"], context)
    return outcomes


def run_phase_grid(spec: GridSpec, run_logger: RunLogger | None = None) -> GridResult:
    """
    Exact-recovery success rate over the (n_min, N') grid.

    Trials that raise count as failures; the grid always completes.
    """
    rows, cols = len(spec.n_min_values), len(spec.n_prime_values)
    tasks = []
    for i, n_min in enumerate(spec.n_min_values):
        for j, n_prime in enumerate(spec.n_prime_values):
            cfg = spec.with_n_samples(n_prime)
            for t in range(spec.trials):
                seed = trial_seed(spec.seed_base, i, j, t)
                tasks.append(_Trial(spec.params(n_min, seed), cfg, seed, f"grid-{i}-{j}-{t}"))

    logger.info("Running %d x %d grid, %d trials per cell", rows, cols, spec.trials)
    outcomes = _execute(tasks, spec.parallelism, run_logger)

    successes = np.zeros((rows, cols), dtype=np.int64)
    seconds = np.zeros((rows, cols))
    min_sizes = np.zeros((rows, cols))
    frequencies = np.zeros((rows, cols))
    completed = np.zeros((rows, cols), dtype=np.int64)
    failures = 0
    for k, outcome in enumerate(outcomes):
        i, rest = divmod(k, cols * spec.trials)
        j = rest // spec.trials
        successes[i, j] += outcome["success"]
        if outcome["error"]:
            failures += 1
            continue
        completed[i, j] += 1
        seconds[i, j] += outcome["seconds"]
        min_sizes[i, j] += outcome["min_sketch_size"]
        frequencies[i, j] += outcome["smallest_frequency"]

    with np.errstate(invalid="ignore", divide="ignore"):
        seconds, min_sizes, frequencies = (a / completed for a in (seconds, min_sizes, frequencies))
    if failures:
        logger.warning("%d of %d grid trials raised", failures, len(tasks))
    return GridResult(
        n_min_values=list(spec.n_min_values),
        n_prime_values=list(spec.n_prime_values),
        trials=spec.trials,
        strategy=spec.pipeline.sampler.strategy.value,
        successes=successes,
        mean_seconds=seconds,
        mean_min_sketch_size=min_sizes,
        mean_smallest_frequency=frequencies,
        failures=failures,
    )


def run_timing_sweep(
    n_values: Iterable[int],
    p: float,
    q: float,
    rho: float,
    r: int,
    cfg: PipelineConfig,
    runs: int = 5,
    baseline_cap: int = DEFAULT_BASELINE_CAP,
    seed_base: int = 0,
    run_logger: RunLogger | None = None,
) -> list[TimingRow]:
    """
    Mean wall time of the sketch pipeline, and of full-graph decomposition for N <= baseline_cap.

    Runs are sequential so that timings do not compete for cores.
    """
    if runs < 1:
        raise ValidationError(f"runs must be >= 1, got {runs}")
    rows = []
    for i, n in enumerate(n_values):
        sizes = tuple(balanced_sizes(n, r))
        sketch_tasks, full_tasks = [], []
        for t in range(runs):
            seed = trial_seed(seed_base, i, t)
            params = SbmParams(n, sizes, p, q, rho, seed)
            sketch_tasks.append(_Trial(params, cfg, seed, f"timing-{n}-{t}"))
            if n <= baseline_cap:
                full_tasks.append(_Trial(params, cfg, seed, f"timing-full-{n}-{t}", full_baseline=True))

        sketch = _execute(sketch_tasks, 1, run_logger)
        full = _execute(full_tasks, 1, run_logger) if full_tasks else []
        row = TimingRow(
            n_nodes=n,
            runs=runs,
            sketch_seconds=_mean_seconds(sketch),
            sketch_success_rate=_rate(sketch),
        )
        if full:
            row.baseline_seconds = _mean_seconds(full)
            row.baseline_success_rate = _rate(full)
        logger.info("N=%d: sketch %.3fs, baseline %s", n, row.sketch_seconds, row.baseline_seconds)
        rows.append(row)
    return rows


def _mean_seconds(outcomes: list[dict]) -> float:
    values = [o["seconds"] for o in outcomes if not o["error"]]
    return float(np.mean(values)) if values else math.nan


def _rate(outcomes: list[dict]) -> float:
    return sum(o["success"] for o in outcomes) / len(outcomes)


def run_balance_diagnostics(
    spec: GridSpec,
    strategies: Sequence[SamplingStrategy] = (SamplingStrategy.URS, SamplingStrategy.SBS),
) -> list[BalanceRow]:
    """
    How well each strategy represents the smallest cluster at fixed N'.

    N' is the first entry of spec.n_prime_values. Spatial strategies sample
    the pre-completed graph, as the pipeline does.
    """
    n_samples = spec.n_prime_values[0]
    rows = []
    for i, n_min in enumerate(spec.n_min_values):
        for strategy in strategies:
            strategy = SamplingStrategy(strategy)
            cfg = spec.with_n_samples(n_samples)
            cfg.sampler.strategy = strategy
            min_sizes, frequencies = [], []
            for t in range(spec.trials):
                seed = trial_seed(spec.seed_base, i, t)
                graph, truth = generate(spec.params(n_min, seed))
                precomplete_rng, sample_rng, _ = stage_rngs(seed)
                sampling_graph = graph
                if strategy in (SamplingStrategy.SRS, SamplingStrategy.MIXED) and cfg.effective_precomplete_budget:
                    sampling_graph = precomplete(
                        graph, cfg.effective_precomplete_budget, cfg.solver, precomplete_rng
                    ).graph
                idx = draw_sketch(sampling_graph, cfg.sampler, sample_rng)
                min_size, frequency = sketch_balance(truth.partition, idx)
                min_sizes.append(min_size)
                frequencies.append(frequency)
            rows.append(
                BalanceRow(
                    strategy=strategy.value,
                    n_min=n_min,
                    n_samples=n_samples,
                    mean_smallest_frequency=float(np.mean(frequencies)),
                    mean_min_sketch_size=float(np.mean(min_sizes)),
                    ideal_frequency=1.0 / spec.r,
                    ideal_min_size=n_samples / spec.r,
                    uniform_frequency=n_min / spec.n_nodes,
                )
            )
    return rows


def run_full_vs_sketch(
    spec: GridSpec,
    baseline_cap: int = DEFAULT_BASELINE_CAP,
    run_logger: RunLogger | None = None,
) -> list[ComparisonRow]:
    """
    Success rate of the sketch pipeline and of full-graph decomposition per n_min.

    Uses N' = spec.n_prime_values[0]; the full baseline is skipped when
    N exceeds baseline_cap.
    """
    cfg = spec.with_n_samples(spec.n_prime_values[0])
    rows = []
    for i, n_min in enumerate(spec.n_min_values):
        sketch_tasks, full_tasks = [], []
        for t in range(spec.trials):
            seed = trial_seed(spec.seed_base, i, t)
            params = spec.params(n_min, seed)
            sketch_tasks.append(_Trial(params, cfg, seed, f"compare-{i}-{t}"))
            if spec.n_nodes <= baseline_cap:
                full_tasks.append(_Trial(params, cfg, seed, f"compare-full-{i}-{t}", full_baseline=True))
        sketch = _execute(sketch_tasks, spec.parallelism, run_logger)
        full = _execute(full_tasks, spec.parallelism, run_logger) if full_tasks else []
        rows.append(
            ComparisonRow(
                n_min=n_min,
                trials=spec.trials,
                sketch_success_rate=_rate(sketch),
                full_success_rate=_rate(full) if full else None,
            )
        )
    return rows


def grid_bounds(spec: GridSpec, c_const: float = 1.0, b: float = 1.0) -> dict[str, TheoryBounds]:
    """Theory bounds for every grid cell, keyed "n_min=<a>,n_prime=<b>"."""
    bounds = {}
    for n_min in spec.n_min_values:
        for n_prime in spec.n_prime_values:
            inputs = TheoryInputs(
                n_nodes=spec.n_nodes,
                r=spec.r,
                n_min=n_min,
                p=spec.p,
                q=spec.q,
                rho=spec.rho,
                n_samples=n_prime,
                c_const=c_const,
                b=b,
            )
            bounds[f"n_min={n_min},n_prime={n_prime}"] = compute_bounds(inputs)
    return bounds


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.6g}"


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def emit_report(
    workspace: ReportWorkspace,
    grid: GridResult | None = None,
    timing: Sequence[TimingRow] | None = None,
    balance: Sequence[BalanceRow] | None = None,
    comparison: Sequence[ComparisonRow] | None = None,
    bounds: dict[str, TheoryBounds] | None = None,
    config: dict | None = None,
) -> list[Path]:
    """
    Write whichever results are given into the workspace.

    The grid CSV has N' values in its first row and n_min values in its
    first column; each cell is the success rate. Infinite bound values are
    written as the strings "inf"/"-inf".

    Returns:
        Paths written, in a fixed order

    Raises:
        ReportError: On I/O failure
    """
    paths = workspace.paths
    written = []
    if grid is not None:
        rates = grid.success_rate if grid.n_min_values and grid.n_prime_values else []
        rows = [
            [n_min, *(_fmt(v) for v in rates[i])] for i, n_min in enumerate(grid.n_min_values)
        ]
        written.append(workspace.write_csv(paths.grid_csv, ["n_min", *grid.n_prime_values], rows))
    if timing is not None:
        header = [
            "n_nodes",
            "runs",
            "sketch_seconds",
            "sketch_success_rate",
            "baseline_seconds",
            "baseline_success_rate",
        ]
        rows = [
            [
                t.n_nodes,
                t.runs,
                _fmt(t.sketch_seconds),
                _fmt(t.sketch_success_rate),
                _fmt(t.baseline_seconds),
                _fmt(t.baseline_success_rate),
            ]
            for t in timing
        ]
        written.append(workspace.write_csv(paths.timing_csv, header, rows))
    if balance is not None:
        header = [
            "strategy",
            "n_min",
            "n_samples",
            "mean_smallest_frequency",
            "mean_min_sketch_size",
            "ideal_frequency",
            "ideal_min_size",
            "uniform_frequency",
        ]
        rows = [
            [
                b.strategy,
                b.n_min,
                b.n_samples,
                _fmt(b.mean_smallest_frequency),
                _fmt(b.mean_min_sketch_size),
                _fmt(b.ideal_frequency),
                _fmt(b.ideal_min_size),
                _fmt(b.uniform_frequency),
            ]
            for b in balance
        ]
        written.append(workspace.write_csv(paths.diagnostics_csv, header, rows))
    if comparison is not None:
        header = ["n_min", "trials", "sketch_success_rate", "full_success_rate"]
        rows = [
            [c.n_min, c.trials, _fmt(c.sketch_success_rate), _fmt(c.full_success_rate)]
            for c in comparison
        ]
        written.append(workspace.write_csv(paths.comparison_csv, header, rows))
    if bounds is not None:
        data = {key: _json_safe(b.to_dict()) for key, b in bounds.items()}
        written.append(workspace.write_json(paths.bounds_json, data))
    if config is not None:
        written.append(workspace.write_json(paths.config_json, _json_safe(config)))
    return written
