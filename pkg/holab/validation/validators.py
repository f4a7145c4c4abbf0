"""Pydantic models for configuration, estimates and reports.

Numerical knobs, Monte Carlo return types and the run configuration all live
here so every module validates its inputs and serialises its outputs the same
way.
"""

from typing import Any, Dict, List, Literal, Optional, Union
import math

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StrictBool,
    StrictFloat,
    StrictInt,
    StrictStr,
    computed_field,
    field_validator,
    model_validator,
)

from holab.tools.logging_ import ValidatorsLogger, assert_and_log_error

logger = ValidatorsLogger().setup()

K_MIN = 0.5

EXPERIMENTS = (
    "rootsys_info",
    "oracle_eval",
    "simulate_radial",
    "simulate_full",
    "couple",
    "equivalence",
    "hw",
    "martingale",
    "theorem1",
    "basis",
    "lln",
)
ExperimentName = Literal[
    "rootsys_info",
    "oracle_eval",
    "simulate_radial",
    "simulate_full",
    "couple",
    "equivalence",
    "hw",
    "martingale",
    "theorem1",
    "basis",
    "lln",
]


def check_multiplicity_value(value: float, label: str = "k") -> float:
    """Reject multiplicities below one half, the wall avoidance threshold."""
    assert_and_log_error(
        logger,
        "error",
        isinstance(value, (int, float)) and math.isfinite(value) and value >= K_MIN,
        f"{label} = {value} violates the requirement k >= 1/2 (paths must avoid the walls)",
    )
    return float(value)


# ---STEPPING---
class StepperConfig(BaseModel):
    """Numerical knobs shared by every simulator.

    Attributes:
        dt_max: Largest time step.
        wall_safety: Step is capped at ``wall_safety * d**2`` with d the distance to the nearest wall.
        t_horizon: Total simulated time.
        seed: Run seed, keys every random stream.
        couple_tolerance: Distance at which a mirror-coupled pair is declared coupled.
        max_rejections: Chamber-exit retries before a wall-contact abort.
        record_stride: Keep every n-th accepted step in the stored path.
        record_path: Store the path at all, or only start and terminal points.
        noise_scale: Multiplies the Gaussian increment, 0 gives the drift-only flow.
        max_jumps: Per-root jump count that aborts a skew-product path.
        intensity_cap: Thinning steps satisfy total rate times dt <= intensity_cap.
        stationarity_window: Trailing fraction of the horizon that must be jump-free.
        residual_intensity_tol: Terminal total jump rate below which the angular part is final.
        rate_scale: Multiplies every jump rate. Only the power check changes it.
        run_to_horizon: Keep stepping coupled pairs after they meet.

    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dt_max: float = 0.01
    wall_safety: float = 0.05
    t_horizon: float = 10.0
    seed: int = 0
    couple_tolerance: float = 1e-6
    max_rejections: int = 30
    record_stride: int = 1
    record_path: bool = True
    noise_scale: float = 1.0
    max_jumps: int = 10_000
    intensity_cap: float = 0.1
    stationarity_window: float = 0.2
    residual_intensity_tol: float = 1e-6
    rate_scale: float = 1.0
    run_to_horizon: bool = True

    @field_validator(
        "dt_max",
        "wall_safety",
        "t_horizon",
        "couple_tolerance",
        "intensity_cap",
        "residual_intensity_tol",
    )
    def positive_float(cls, v: float) -> float:
        """Time steps, horizons and tolerances are strictly positive."""
        assert_and_log_error(
            logger, "error", math.isfinite(v) and v > 0, f"value {v} must be > 0"
        )
        return v

    @field_validator("max_rejections", "record_stride", "max_jumps")
    def positive_int(cls, v: int) -> int:
        """Counts are at least one."""
        assert_and_log_error(logger, "error", v >= 1, f"value {v} must be >= 1")
        return v

    @field_validator("seed")
    def non_negative_seed(cls, v: int) -> int:
        """Seeds key numpy SeedSequence, which needs non-negative integers."""
        assert_and_log_error(logger, "error", v >= 0, f"seed {v} must be >= 0")
        return v

    @field_validator("noise_scale", "rate_scale")
    def non_negative_scale(cls, v: float) -> float:
        """Scales may switch a term off but never flip its sign."""
        assert_and_log_error(
            logger, "error", math.isfinite(v) and v >= 0, f"scale {v} must be >= 0"
        )
        return v

    @field_validator("stationarity_window")
    def window_fraction(cls, v: float) -> float:
        """The window is a fraction of the horizon."""
        assert_and_log_error(
            logger, "error", 0 < v < 1, f"stationarity_window {v} must be in (0, 1)"
        )
        return v


# ---RANK ONE ORACLE---
class Rank1Params(BaseModel):
    """Root length and multiplicity of a one-dimensional system, with its derived rho."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = 2.0
    k: float = 1.0

    @field_validator("alpha")
    def alpha_positive(cls, v: float) -> float:
        assert_and_log_error(
            logger, "error", math.isfinite(v) and v > 0, f"alpha {v} must be > 0"
        )
        return v

    @field_validator("k")
    def k_at_least_half(cls, v: float) -> float:
        return check_multiplicity_value(v)

    @computed_field
    @property
    def rho(self) -> float:
        """Half the multiplicity-weighted positive root."""
        return self.k * self.alpha / 2.0


# ---ESTIMATES---
class McEstimate(BaseModel):
    """Monte Carlo point estimate.

    ``stderr`` is the sample standard deviation over ``sqrt(n)``. ``excluded``
    counts undetermined trajectories left out of ``n``.
    """

    model_config = ConfigDict(frozen=True)

    value: float
    stderr: float
    n: int
    seed: int
    excluded: int = 0

    @field_validator("stderr")
    def stderr_non_negative(cls, v: float) -> float:
        assert_and_log_error(
            logger, "error", not v < 0, f"stderr {v} must be non-negative"
        )
        return v

    @field_validator("n", "excluded")
    def count_non_negative(cls, v: int) -> int:
        assert_and_log_error(logger, "error", v >= 0, f"count {v} must be >= 0")
        return v


class HwTable(BaseModel):
    """Estimated probabilities that the angular part settles at each Weyl element.

    Keys are Weyl element labels. Every determined trajectory is counted under
    exactly one key, so the counts add up to ``n_determined``.
    """

    start: List[float]
    per_w: Dict[str, McEstimate]
    counts: Dict[str, int]
    n_determined: int
    excluded: int
    method: str

    @model_validator(mode="after")
    def counts_are_exhaustive(self) -> "HwTable":
        assert_and_log_error(
            logger,
            "error",
            set(self.per_w) == set(self.counts),
            f"per_w keys {sorted(self.per_w)} differ from count keys {sorted(self.counts)}",
        )
        assert_and_log_error(
            logger,
            "error",
            sum(self.counts.values()) == self.n_determined,
            f"counts sum to {sum(self.counts.values())}, expected {self.n_determined}",
        )
        for label, estimate in self.per_w.items():
            assert_and_log_error(
                logger,
                "error",
                0.0 <= estimate.value <= 1.0,
                f"h_{label} = {estimate.value} is outside [0, 1]",
            )
        return self

    def value(self, label: str) -> float:
        """Estimated probability for one element label."""
        return self.per_w[label].value

    def total(self) -> float:
        """Sum of the estimates, computed from integer counts."""
        if self.n_determined == 0:
            return 0.0
        return sum(self.counts.values()) / self.n_determined


# ---COUPLING---
class CouplingSummary(BaseModel):
    """Empirical law of mirror-coupling times with right censoring at each pair's horizon."""

    n: int
    n_coupled: int
    fraction_coupled: float
    coupling_times: List[float]
    censor_times: List[float]
    ecdf_times: List[float]
    ecdf_values: List[float]
    km_times: List[float]
    km_survival: List[float]
    median_qv_rate: Optional[float] = None
    median_drift_gap: Optional[float] = None

    def fraction_coupled_by(self, t: float) -> float:
        """Fraction of all pairs coupled at or before ``t``."""
        if self.n == 0:
            return 0.0
        return sum(1 for c in self.coupling_times if c <= t) / self.n

    def survival_at(self, t: float) -> float:
        """Kaplan-Meier estimate of P(coupling time > t)."""
        survival = 1.0
        for time_, value in zip(self.km_times, self.km_survival):
            if time_ <= t:
                survival = value
            else:
                break
        return survival


# ---REPORTS---
class CheckOutcome(BaseModel):
    """One named hypothesis test or threshold comparison. Serialised with the key ``pass``."""

    model_config = ConfigDict(populate_by_name=True)

    name: str
    statistic: Optional[float] = None
    p: Optional[float] = None
    threshold: Optional[float] = None
    passed: bool = Field(alias="pass")


class ExperimentReport(BaseModel):
    """Uniform result document of every estimator and experiment."""

    model_config = ConfigDict(populate_by_name=True)

    experiment: str
    estimates: Dict[str, Any] = Field(default_factory=dict)
    stderr: Dict[str, Any] = Field(default_factory=dict)
    checks: List[CheckOutcome] = Field(default_factory=list, alias="tests")
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """True when every check passed."""
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> CheckOutcome:
        """The check called ``name``."""
        for outcome in self.checks:
            if outcome.name == name:
                return outcome
        raise KeyError(name)

    def failures(self) -> List[str]:
        """Names of the failed checks."""
        return [check.name for check in self.checks if not check.passed]


# ---RUN CONFIGURATION---
class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class SystemSection(_Section):
    """Root system and multiplicities."""

    family: Literal["A", "B", "C", "D", "BC", "rank1"] = "rank1"
    rank: StrictInt = 1
    normalization: Union[Literal["standard"], StrictFloat] = "standard"
    k: Union[StrictFloat, List[StrictFloat], Dict[str, StrictFloat]] = 1.0
    weyl_cap: StrictInt = 100_000

    @field_validator("k")
    def k_at_least_half(cls, v):
        values = v.values() if isinstance(v, dict) else v if isinstance(v, list) else [v]
        for value in values:
            check_multiplicity_value(value)
        return v

    @field_validator("rank", "weyl_cap")
    def positive(cls, v: int) -> int:
        assert_and_log_error(logger, "error", v >= 1, f"value {v} must be >= 1")
        return v


class ExperimentSection(_Section):
    """Experiment selection and its parameters. Unset points get per-system defaults."""

    name: ExperimentName = "lln"
    x0: Optional[List[StrictFloat]] = None
    y0: Optional[List[StrictFloat]] = None
    horizon: StrictFloat = 10.0
    dt: StrictFloat = 0.01
    paths: StrictInt = 1000
    lam: Optional[StrictFloat] = Field(default=None, alias="lambda")
    grid: Optional[List[StrictFloat]] = None
    order: Optional[List[StrictInt]] = None
    method: Literal["thinning", "skew"] = "thinning"
    t_values: List[StrictFloat] = Field(default_factory=lambda: [5.0, 20.0])
    wall_safety: StrictFloat = 0.05
    couple_tolerance: StrictFloat = 1e-6
    min_coupled_fraction: StrictFloat = 0.99
    burn_in: StrictFloat = 0.25

    @field_validator("horizon", "dt", "wall_safety", "couple_tolerance")
    def positive_float(cls, v: float) -> float:
        assert_and_log_error(
            logger, "error", math.isfinite(v) and v > 0, f"value {v} must be > 0"
        )
        return v

    @field_validator("paths")
    def positive_paths(cls, v: int) -> int:
        assert_and_log_error(logger, "error", v >= 1, f"paths {v} must be >= 1")
        return v

    @field_validator("min_coupled_fraction", "burn_in")
    def unit_interval(cls, v: float) -> float:
        assert_and_log_error(
            logger, "error", 0 <= v < 1 or v == 1.0, f"value {v} must be in [0, 1]"
        )
        return v


class RunSection(_Section):
    """Reproducibility envelope."""

    seed: StrictInt = 0
    out: StrictStr = "output/files"
    threads: StrictInt = 1
    use_cache: StrictBool = False

    @field_validator("seed")
    def non_negative_seed(cls, v: int) -> int:
        assert_and_log_error(logger, "error", v >= 0, f"seed {v} must be >= 0")
        return v

    @field_validator("threads")
    def positive_threads(cls, v: int) -> int:
        assert_and_log_error(logger, "error", v >= 1, f"threads {v} must be >= 1")
        return v


class RunConfig(_Section):
    """Full run configuration: ``[system]``, ``[experiment]`` and ``[run]`` sections."""

    system: SystemSection = Field(default_factory=SystemSection)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    run: RunSection = Field(default_factory=RunSection)
