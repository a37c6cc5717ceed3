"""Configuration dataclasses, config-file loading, and experiment presets."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any

from sketchcluster.exceptions import ConfigError, ValidationError


class SamplingStrategy(str, Enum):
    """Node sampling strategies."""

    URS = "urs"
    SBS = "sbs"
    SRS = "srs"
    MIXED = "mixed"

    def __str__(self) -> str:
        return self.value


class LambdaMode(str, Enum):
    """How the sparse-term weight of the decomposition is chosen."""

    SEARCH = "search"  # 1/(32 sqrt(N' rho)) then bisection
    FIXED_INV_SQRT = "fixed"  # 1/sqrt(N')

    def __str__(self) -> str:
        return self.value


@dataclass
class SamplerConfig:
    """
    Node sampling settings.

    Controls the strategy, the sketch size N', the embedding dimension used
    by SRS, and the URS share of the budget in mixed mode.
    """

    strategy: SamplingStrategy = SamplingStrategy.URS
    n_samples: int = 200
    embed_dim: int = 500
    urs_fraction: float = 0.5
    seed: int | None = None

    def __post_init__(self):
        try:
            self.strategy = SamplingStrategy(self.strategy)
        except ValueError:
            valid = [s.value for s in SamplingStrategy]
            raise ValidationError(f"strategy must be one of {valid}, got {self.strategy!r}")
        if self.n_samples < 1:
            raise ValidationError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.embed_dim < 1:
            raise ValidationError(f"embed_dim must be >= 1, got {self.embed_dim}")
        if not 0.0 <= self.urs_fraction <= 1.0:
            raise ValidationError(f"urs_fraction must be in [0, 1], got {self.urs_fraction}")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["strategy"] = self.strategy.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> SamplerConfig:
        return _build(cls, data, "sampler")


@dataclass
class SolverConfig:
    """
    Sketch decomposition settings.

    tolerance is the relative feasibility residual on observed entries;
    the augmented-Lagrangian penalty starts at 1/||A'||_2 and grows by
    mu_growth per iteration up to mu_cap_factor times its initial value.
    """

    lambda_mode: LambdaMode = LambdaMode.SEARCH
    lambda_fixed_override: float | None = None
    max_iterations: int = 500
    tolerance: float = 1e-6
    search_depth: int = 12
    rounding_threshold: float = 0.5
    mu_growth: float = 1.1
    mu_cap_factor: float = 1e7
    residual_log: str | None = None  # CSV path for per-iteration residuals

    def __post_init__(self):
        try:
            self.lambda_mode = LambdaMode(self.lambda_mode)
        except ValueError:
            valid = [m.value for m in LambdaMode]
            raise ValidationError(f"lambda_mode must be one of {valid}, got {self.lambda_mode!r}")
        if self.lambda_fixed_override is not None and self.lambda_fixed_override <= 0:
            raise ValidationError("lambda_fixed_override must be positive")
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.tolerance <= 0:
            raise ValidationError(f"tolerance must be > 0, got {self.tolerance}")
        if self.search_depth < 1:
            raise ValidationError(f"search_depth must be >= 1, got {self.search_depth}")
        if not 0.0 < self.rounding_threshold < 1.0:
            raise ValidationError(
                f"rounding_threshold must be in (0, 1), got {self.rounding_threshold}"
            )
        if self.mu_growth < 1.0:
            raise ValidationError(f"mu_growth must be >= 1, got {self.mu_growth}")
        if self.mu_cap_factor < 1.0:
            raise ValidationError(f"mu_cap_factor must be >= 1, got {self.mu_cap_factor}")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["lambda_mode"] = self.lambda_mode.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> SolverConfig:
        return _build(cls, data, "solver")


@dataclass
class PipelineConfig:
    """
    End-to-end settings.

    precomplete_budget applies to SRS and mixed sampling: None uses the
    main budget n_samples, 0 disables pre-completion (fully observed
    graphs only).
    """

    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    precomplete_budget: int | None = None
    record_timings: bool = True

    def __post_init__(self):
        if isinstance(self.sampler, dict):
            self.sampler = SamplerConfig.from_dict(self.sampler)
        if isinstance(self.solver, dict):
            self.solver = SolverConfig.from_dict(self.solver)
        if self.precomplete_budget is not None and self.precomplete_budget < 0:
            raise ValidationError("precomplete_budget must be >= 0")

    @property
    def effective_precomplete_budget(self) -> int:
        if self.precomplete_budget is None:
            return self.sampler.n_samples
        return self.precomplete_budget

    def to_dict(self) -> dict:
        return {
            "sampler": self.sampler.to_dict(),
            "solver": self.solver.to_dict(),
            "precomplete_budget": self.precomplete_budget,
            "record_timings": self.record_timings,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PipelineConfig:
        return _build(cls, data, "pipeline")


def _build(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"Unknown keys in '{section}': {sorted(unknown)}")
    return cls(**data)


CONFIG_SECTIONS = ("sbm", "sampler", "solver", "pipeline", "grid", "timing")


def load_config(path: str | Path) -> dict[str, dict[str, Any]]:
    """
    Load a JSON config file.

    Args:
        path: JSON document whose top-level keys are config sections

    Returns:
        Mapping from section name to its key-value settings

    Raises:
        ConfigError: If the file is unreadable, not a JSON object, or
            contains unknown sections
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", str(path)) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}", str(path)) from e

    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", str(path))
    unknown = set(data) - set(CONFIG_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}", str(path))
    for name, section in data.items():
        if not isinstance(section, dict):
            raise ConfigError(f"section '{name}' must be an object", str(path))
    return data


class ExperimentPreset(str, Enum):
    """Named parameter sets for the reproduction experiments."""

    FIG1_TIMING = "fig1-timing"
    FIG2_UNBALANCED = "fig2-unbalanced"
    FIG3_SMALL_Q = "fig3-small-q"
    FIG4_LARGE_Q = "fig4-large-q"
    DESK_FIG2 = "desk-fig2"

    def __str__(self) -> str:
        return self.value


PRESET_DESCRIPTIONS = {
    ExperimentPreset.FIG1_TIMING: "Timing: r=2 balanced, p=0.8, q=0.1, rho=0.7, URS N'=200",
    ExperimentPreset.FIG2_UNBALANCED: "Unbalanced grid: N=5000, two small clusters, p=0.8, q=0.1, rho=0.7",
    ExperimentPreset.FIG3_SMALL_Q: "Small q: N=5000, p=0.6, q=0.01, rho=0.4, SbS N'=500",
    ExperimentPreset.FIG4_LARGE_Q: "Large q: N=5000, p=0.8, q=0.23, rho=0.7, SRS m=500",
    ExperimentPreset.DESK_FIG2: "Desk-scale unbalanced grid: N=800, p=0.8, q=0.1, rho=0.7",
}

PRESETS: dict[ExperimentPreset, dict[str, dict[str, Any]]] = {
    ExperimentPreset.FIG1_TIMING: {
        "sbm": {"p": 0.8, "q": 0.1, "rho": 0.7, "r": 2},
        "sampler": {"strategy": "urs", "n_samples": 200},
        "timing": {"n_values": [500, 1000, 2000, 5000, 10000], "runs": 5},
    },
    ExperimentPreset.FIG2_UNBALANCED: {
        "sbm": {"p": 0.8, "q": 0.1, "rho": 0.7, "n_nodes": 5000, "r_small": 2},
        "sampler": {"strategy": "sbs", "n_samples": 400, "embed_dim": 500, "urs_fraction": 0.5},
        "grid": {
            "n_min_values": [50, 100, 200, 300, 400, 500, 600, 700],
            "n_prime_values": [50, 100, 200, 300, 400, 500, 600, 700],
            "trials": 20,
        },
    },
    ExperimentPreset.FIG3_SMALL_Q: {
        "sbm": {"p": 0.6, "q": 0.01, "rho": 0.4, "n_nodes": 5000, "r_small": 2},
        "sampler": {"strategy": "sbs", "n_samples": 500},
        "grid": {"n_min_values": [60, 120, 180, 220, 300], "n_prime_values": [500], "trials": 20},
    },
    ExperimentPreset.FIG4_LARGE_Q: {
        "sbm": {"p": 0.8, "q": 0.23, "rho": 0.7, "n_nodes": 5000, "r_small": 2},
        "sampler": {"strategy": "mixed", "n_samples": 400, "embed_dim": 500, "urs_fraction": 0.5},
        "grid": {
            "n_min_values": [50, 100, 200, 300, 400],
            "n_prime_values": [100, 200, 300, 400, 500],
            "trials": 20,
        },
    },
    ExperimentPreset.DESK_FIG2: {
        "sbm": {"p": 0.8, "q": 0.1, "rho": 0.7, "n_nodes": 800, "r_small": 2},
        "sampler": {"strategy": "sbs", "n_samples": 160},
        "grid": {"n_min_values": [40, 80, 120, 160], "n_prime_values": [80, 160, 240], "trials": 20},
    },
}


def get_preset(preset: ExperimentPreset | str) -> dict[str, dict[str, Any]]:
    """
    Get a deep copy of a preset's config sections.

    Args:
        preset: ExperimentPreset or its string value

    Raises:
        ConfigError: If the name is not a known preset
    """
    try:
        preset = ExperimentPreset(preset)
    except ValueError:
        raise ConfigError(f"Unknown preset {preset!r}; known: {list(list_presets())}")
    return copy.deepcopy(PRESETS[preset])


def list_presets() -> dict[str, str]:
    """Map preset values to descriptions."""
    return {preset.value: PRESET_DESCRIPTIONS[preset] for preset in ExperimentPreset}


def get_preset_description(preset: ExperimentPreset) -> str:
    return PRESET_DESCRIPTIONS.get(preset, "Custom preset")
