"""
Closed-form recovery bounds for sketch-based clustering.

Every function here is a pure evaluation of a sufficient condition or
supporting quantity, using natural logarithms. The constant C scales the
decomposition bounds and defaults to 1; c (failure probability scale) is
never used numerically.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

from sketchcluster.exceptions import ValidationError


class Regime(str, Enum):
    """Inter-cluster density regime, q*f <= 1 being small-q."""

    SMALL_Q = "small_q"
    LARGE_Q = "large_q"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TheoryInputs:
    """
    Model and sketch parameters the bounds are evaluated at.

    b is the target number of sketch nodes from the smallest cluster.
    """

    n_nodes: int
    r: int
    n_min: int
    p: float
    q: float
    rho: float
    n_samples: int
    c_const: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.n_nodes < 1 or self.r < 1 or self.n_min < 1:
            raise ValidationError("n_nodes, r and n_min must be positive")
        if self.n_min * self.r > self.n_nodes:
            raise ValidationError(
                f"n_min={self.n_min} exceeds N/r={self.n_nodes / self.r:.3g}"
            )
        if not 0.0 < self.p <= 1.0:
            raise ValidationError(f"p must be in (0, 1], got {self.p}")
        if not 0.0 <= self.q <= 1.0:
            raise ValidationError(f"q must be in [0, 1], got {self.q}")
        if not 0.0 < self.rho <= 1.0:
            raise ValidationError(f"rho must be in (0, 1], got {self.rho}")
        if self.n_samples < 0:
            raise ValidationError(f"n_samples must be >= 0, got {self.n_samples}")
        if self.c_const <= 0:
            raise ValidationError(f"c_const must be positive, got {self.c_const}")
        if self.b < 0:
            raise ValidationError(f"b must be >= 0, got {self.b}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Verdict:
    """Outcome of one sufficient condition, with the sides that were compared."""

    name: str
    holds: bool
    sides: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "sides": dict(self.sides)}


@dataclass(frozen=True)
class TheoryBounds:
    """All derived quantities for one TheoryInputs, plus condition verdicts."""

    gamma: float
    f: float
    mu_min: float
    eta: float
    alpha: float
    beta: float
    g: float
    g_prime: float
    zeta: float
    zeta_prime: float
    eps1: float
    eps2: float
    p_minus: float
    q_minus: float
    rho_minus: float
    gamma_prime: float
    regime: Regime
    verdicts: dict[str, bool] = field(default_factory=dict)

    @property
    def preconditions_ok(self) -> bool:
        return self.alpha < 1.0 and self.beta < 1.0

    def to_dict(self) -> dict:
        data = asdict(self)
        data["regime"] = self.regime.value
        data["verdicts"] = dict(sorted(self.verdicts.items()))
        return data


def density_difference(p: float, q: float) -> float:
    """gamma = 1 - 2 max(1 - p, q)."""
    return 1.0 - 2.0 * max(1.0 - p, q)


def _zeta(c_const: float, n_nodes: int, rho: float, gamma: float) -> float:
    if gamma <= 0.0 or rho <= 0.0:
        return math.inf
    return c_const * math.log(n_nodes) ** 2 / (rho * gamma**2)


def retrieval_threshold(p: float, gamma: float, r: int, n_nodes: int) -> float:
    """Sketch smallest-cluster size 8p/gamma^2 log(r N^2) that guarantees retrieval."""
    if gamma <= 0.0:
        return math.inf
    return 8.0 * p / gamma**2 * math.log(r * n_nodes**2)


def sketch_probability_bounds(inputs: TheoryInputs) -> tuple[float, float, float]:
    """
    Lower bounds (p-, q-, rho-) on the densities of an SbS sketch.

    eps1 = N (1 - rho p)^n_min (1 - rho q)^n_min and eps2 = N (1 - rho)^N
    are clamped to [0, 1] before use.
    """
    p_minus, q_minus, rho_minus, _, _ = _sketch_probabilities(inputs)
    return p_minus, q_minus, rho_minus


def _sketch_probabilities(inputs: TheoryInputs) -> tuple[float, float, float, float, float]:
    n, n_min = inputs.n_nodes, inputs.n_min
    eps1 = n * (1.0 - inputs.rho * inputs.p) ** n_min * (1.0 - inputs.rho * inputs.q) ** n_min
    eps2 = n * (1.0 - inputs.rho) ** n
    shrink1 = (1.0 - min(eps1, 1.0)) ** 2
    shrink2 = (1.0 - min(eps2, 1.0)) ** 2
    return inputs.p * shrink1, inputs.q * shrink1, inputs.rho * shrink2, eps1, eps2


def _core(inputs: TheoryInputs) -> TheoryBounds:
    n, r, n_min = inputs.n_nodes, inputs.r, inputs.n_min
    p, q, rho = inputs.p, inputs.q, inputs.rho

    gamma = density_difference(p, q)
    f = n / n_min
    mu_min = rho * ((p - q) * n_min + q * n)
    eta = 1.0 + (q / p) * (f - 1.0)
    alpha = math.sqrt(6.0 * math.log(2 * n) / mu_min) if mu_min > 0 else math.inf
    beta = math.sqrt(6.0 * math.log(2 * r * n) / mu_min) if mu_min > 0 else math.inf

    if beta < 1.0:
        spread = (1.0 + beta) / (1.0 - beta)
        g = eta * spread / (1.0 - inputs.b / n_min) if inputs.b < n_min else math.inf
        g_prime = 2.0 * eta * spread
    else:
        g = g_prime = math.inf

    p_minus, q_minus, rho_minus, eps1, eps2 = _sketch_probabilities(inputs)
    gamma_prime = density_difference(p_minus, q_minus)

    return TheoryBounds(
        gamma=gamma,
        f=f,
        mu_min=mu_min,
        eta=eta,
        alpha=alpha,
        beta=beta,
        g=g,
        g_prime=g_prime,
        zeta=_zeta(inputs.c_const, n, rho, gamma),
        zeta_prime=_zeta(inputs.c_const, n, rho_minus, gamma_prime),
        eps1=eps1,
        eps2=eps2,
        p_minus=p_minus,
        q_minus=q_minus,
        rho_minus=rho_minus,
        gamma_prime=gamma_prime,
        regime=Regime.SMALL_Q if q * f <= 1.0 else Regime.LARGE_Q,
    )


def check_urs_sampling(inputs: TheoryInputs) -> Verdict:
    """URS sketch size N >= N' >= 2f[b + log(2rN)] that guarantees n'_min > b."""
    n, n_prime = inputs.n_nodes, inputs.n_samples
    f = n / inputs.n_min
    lower = 2.0 * f * (inputs.b + math.log(2 * inputs.r * n))
    holds = n_prime >= 1 and n >= n_prime >= lower
    return Verdict("urs_sampling", holds, {"n_samples": n_prime, "lower": lower, "upper": n})


def check_sketch_decomposition(inputs: TheoryInputs) -> dict[str, Verdict]:
    """N' window min{n_min^2/zeta, N} >= N' >= 4f[f zeta + log(2rN)] for exact sketch decomposition."""
    core = _core(inputs)
    n, n_prime = inputs.n_nodes, inputs.n_samples
    upper = min(inputs.n_min**2 / core.zeta, n) if core.zeta > 0 else float(n)
    lower = 4.0 * core.f * (core.f * core.zeta + math.log(2 * inputs.r * n))
    return {
        "decomposition_upper": Verdict(
            "decomposition_upper", n_prime <= upper, {"n_samples": n_prime, "upper": upper}
        ),
        "decomposition_lower": Verdict(
            "decomposition_lower", n_prime >= lower, {"n_samples": n_prime, "lower": lower}
        ),
    }


def check_theorem1(inputs: TheoryInputs) -> dict[str, Verdict]:
    """
    Sufficient conditions for exact recovery with uniform sampling.

    Returns:
        Verdicts "urs_cluster_size" (n_min >= 8p/gamma^2 log(rN^2)),
        "urs_sketch_upper" (N' <= min{n_min^2/zeta, N}) and
        "urs_sketch_lower" (N' >= 4f max{f zeta, 4p/gamma^2 log(rN^2)} + 4f log(2rN))
    """
    core = _core(inputs)
    n, r, n_prime = inputs.n_nodes, inputs.r, inputs.n_samples
    size_needed = retrieval_threshold(inputs.p, core.gamma, r, n)
    upper = min(inputs.n_min**2 / core.zeta, n) if core.zeta > 0 else float(n)
    lower = 4.0 * core.f * max(core.f * core.zeta, size_needed / 2.0) + 4.0 * core.f * math.log(
        2 * r * n
    )
    return {
        "urs_cluster_size": Verdict(
            "urs_cluster_size", inputs.n_min >= size_needed, {"n_min": inputs.n_min, "lower": size_needed}
        ),
        "urs_sketch_upper": Verdict(
            "urs_sketch_upper", n_prime <= upper, {"n_samples": n_prime, "upper": upper}
        ),
        "urs_sketch_lower": Verdict(
            "urs_sketch_lower", n_prime >= lower, {"n_samples": n_prime, "lower": lower}
        ),
    }


def check_sbs_theorems(inputs: TheoryInputs) -> dict[str, Verdict]:
    """
    Sufficient conditions for SbS sampling and recovery.

    Primed quantities use the sketch density lower bounds p-, q-, rho-.
    The cluster-size lower bound is evaluated literally,
    r g' [r g' zeta' log^2 N + 2 log(2rN)], even though zeta' already
    carries a log^2 N factor.

    Returns:
        Verdicts "sbs_beta_lt_1", "sbs_sampling", "sbs_cluster_upper",
        "sbs_cluster_lower", "sbs_cluster_size", "sbs_sketch_size", and
        "sbs_vs_urs" whose sides carry the ratio of the SbS to the URS
        sketch-size lower bound
    """
    core = _core(inputs)
    n, r, n_prime = inputs.n_nodes, inputs.r, inputs.n_samples
    log_n = math.log(n)
    log_2rn = math.log(2 * r * n)

    sampling_lower = r * core.g * (inputs.b * log_n + log_2rn)
    cluster_upper = min(inputs.n_min**2 / (4.0 * core.zeta_prime), n) if core.zeta_prime > 0 else n
    cluster_lower = r * core.g_prime * (r * core.g_prime * core.zeta_prime * log_n**2 + 2.0 * log_2rn)
    size_needed = 2.0 * retrieval_threshold(inputs.p, core.gamma, r, n)
    main_factor = 16.0 * inputs.p / core.gamma**2 * log_n if core.gamma > 0 else math.inf
    sketch_lower = r * core.g_prime * log_2rn * (main_factor + 1.0)

    urs_lower = check_theorem1(inputs)["urs_sketch_lower"].sides["lower"]
    ratio = sketch_lower / urs_lower if urs_lower > 0 else math.inf

    verdicts = [
        Verdict("sbs_beta_lt_1", core.beta < 1.0, {"beta": core.beta}),
        Verdict(
            "sbs_sampling",
            core.beta < 1.0 and n >= n_prime >= sampling_lower,
            {"n_samples": n_prime, "lower": sampling_lower, "upper": n},
        ),
        Verdict("sbs_cluster_upper", n_prime <= cluster_upper, {"n_samples": n_prime, "upper": cluster_upper}),
        Verdict("sbs_cluster_lower", n_prime >= cluster_lower, {"n_samples": n_prime, "lower": cluster_lower}),
        Verdict("sbs_cluster_size", inputs.n_min >= size_needed, {"n_min": inputs.n_min, "lower": size_needed}),
        Verdict(
            "sbs_sketch_size",
            n >= n_prime >= sketch_lower,
            {"n_samples": n_prime, "lower": sketch_lower, "upper": n},
        ),
        Verdict("sbs_vs_urs", ratio < 1.0, {"sbs_lower": sketch_lower, "urs_lower": urs_lower, "ratio": ratio}),
    ]
    return {v.name: v for v in verdicts}


def compute_bounds(inputs: TheoryInputs) -> TheoryBounds:
    """
    Evaluate every derived quantity and condition for one parameter set.

    alpha >= 1 or beta >= 1 is reported through the "alpha_lt_1" and
    "beta_lt_1" verdicts; the quantities that need beta < 1 are then inf.
    """
    core = _core(inputs)
    verdicts = {
        "alpha_lt_1": core.alpha < 1.0,
        "beta_lt_1": core.beta < 1.0,
        "b_lt_n_min": inputs.b < inputs.n_min,
        "gamma_positive": core.gamma > 0.0,
    }
    checks = {"urs_sampling": check_urs_sampling(inputs)}
    checks.update(check_sketch_decomposition(inputs))
    checks.update(check_theorem1(inputs))
    checks.update(check_sbs_theorems(inputs))
    verdicts.update({name: v.holds for name, v in checks.items()})
    return TheoryBounds(**{**asdict(core), "regime": core.regime, "verdicts": verdicts})


def sbs_min_cluster_probability(inputs: TheoryInputs) -> float:
    """
    Lower bound (1 - alpha)/(1 + alpha) / (r eta) on the chance an SbS draw hits the smallest cluster.

    Returns 0.0 when alpha >= 1, where the bound says nothing.
    """
    core = _core(inputs)
    if core.alpha >= 1.0:
        return 0.0
    return (1.0 - core.alpha) / (1.0 + core.alpha) / (inputs.r * core.eta)


def retrieval_chernoff_bound(p: float, q: float, sketch_sizes: list[int], own: int | None = None) -> float:
    """
    Union of Chernoff tails bounding one node's retrieval failure.

    exp(-(p-q)^2 n'_own / (8p)) for its own cluster plus
    exp(-3 (p-q)^2 n'_i / (24q + 4(p-q))) for every other cluster i.
    """
    if not sketch_sizes or min(sketch_sizes) < 1:
        raise ValidationError(f"Sketch cluster sizes must be positive, got {list(sketch_sizes)}")
    if p <= q:
        return math.inf
    own = min(range(len(sketch_sizes)), key=lambda i: sketch_sizes[i]) if own is None else own
    gap = p - q
    bound = math.exp(-(gap**2) * sketch_sizes[own] / (8.0 * p))
    for i, size in enumerate(sketch_sizes):
        if i != own:
            bound += math.exp(-3.0 * gap**2 * size / (24.0 * q + 4.0 * gap))
    return bound


def min_cluster_size_orders(inputs: TheoryInputs) -> dict[str, float]:
    """Smallest-cluster size each method needs, evaluated without hidden constants or polylog slack beyond those shown."""
    n, r = inputs.n_nodes, inputs.r
    gamma = density_difference(inputs.p, inputs.q)
    if gamma <= 0.0:
        return dict.fromkeys(("full", "urs", "sbs_large_q", "sbs_small_q"), math.inf)
    log_n = math.log(n)
    sqrt_rho = math.sqrt(inputs.rho)
    return {
        "full": math.sqrt(n) * log_n / (sqrt_rho * gamma),
        "urs": math.sqrt(n) * log_n / (sqrt_rho * gamma**2),
        "sbs_large_q": r * math.sqrt(inputs.q * n) * log_n**2 / (sqrt_rho * gamma**2),
        "sbs_small_q": r**2 * log_n**3 / (inputs.rho * gamma**2),
    }


def complexity_orders(inputs: TheoryInputs, embed_dim: int = 500) -> dict[str, float]:
    """Per-iteration decomposition cost orders, plus the SRS sampling cost m N' N."""
    n, r, n_prime = inputs.n_nodes, inputs.r, inputs.n_samples
    gamma = density_difference(inputs.p, inputs.q)
    f = n / inputs.n_min
    denom = inputs.rho**2 * gamma**4 if gamma > 0 else 0.0
    return {
        "full": r * n**2,
        "sketch": r * n_prime**2,
        "urs": r * f**4 / denom if denom else math.inf,
        "sbs_large_q": r**3 * inputs.q**4 * f**4 / denom if denom else math.inf,
        "sbs_small_q": r**5 / denom if denom else math.inf,
        "srs_sampling": embed_dim * n_prime * n,
    }
