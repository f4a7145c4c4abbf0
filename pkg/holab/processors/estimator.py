"""Monte Carlo estimators and verification experiments.

Every experiment returns an :class:`~holab.validation.validators.ExperimentReport`
whose checks decide the run's exit status. Reductions are plain numpy sums
over results returned in trajectory order, so reports do not depend on the
thread budget.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple
import math

import numpy as np

from holab.processors.diffusion import (
    couple_ensemble,
    coupling_statistics,
    radial_checkpoint_ensemble,
    simulate_radial,
    simulate_radial_checkpoints,
)
from holab.processors.ho_operators import ScalarField, coefficients
from holab.processors.hypergeometric import rank1_G
from holab.processors.jumps import UNDETERMINED, full_ensemble
from holab.processors.rootsys import (
    RootSystem,
    WeylElement,
    build_root_system,
    radial_decompose,
)
from holab.tools.logging_ import (
    EstimatorLogger,
    log_decorator,
    log_and_raise_error,
)
from holab.tools.parallel import ordered_map
from holab.validation.data_types import Multiplicities, VectorLike, as_vector
from holab.validation.validators import (
    CheckOutcome,
    ExperimentReport,
    HwTable,
    McEstimate,
    Rank1Params,
    StepperConfig,
)

logger = EstimatorLogger().setup()

MIN_HW_PATHS = 100
MAX_UNDETERMINED_FRACTION = 0.2
Z_LIMIT = 3.0
MAX_CONDITION = 1e3
MIN_DETERMINANT = 0.5
DEFAULT_BASIS_GRID = (-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0)


def mc_estimate(values: Sequence[float], seed: int, excluded: int = 0) -> McEstimate:
    """Sample mean with standard error ``std / sqrt(n)``."""
    values = np.asarray(values, dtype=float)
    n = int(values.size)
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    value = float(np.mean(values)) if n else float("nan")
    return McEstimate(value=value, stderr=stderr, n=n, seed=seed, excluded=excluded)


def _z_score(difference: float, stderr: float) -> Optional[float]:
    if stderr > 0:
        return difference / stderr
    return 0.0 if difference == 0 else None


# ---BOUNDARY FUNCTIONS---
@log_decorator(logger, level="info", suffix_message="Estimate boundary functions")
def estimate_hw(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    n: int,
    method: str = "thinning",
    root_order: Optional[Sequence[int]] = None,
    trajectory_offset: int = 0,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> HwTable:
    """Frequencies with which the angular part settles at each Weyl element, from ``x0``.

    Undetermined trajectories are excluded and counted. Every element of W
    has an entry, zero when never observed, with a binomial standard error.
    Trajectory ids start at ``trajectory_offset``; tables that are compared
    against each other need disjoint id ranges to be independent.

    Raises:
        ValueError: With fewer than 100 paths or more than 20% undetermined.

    """
    if n < MIN_HW_PATHS:
        log_and_raise_error(
            logger, "error", ValueError, f"estimate_hw needs n >= {MIN_HW_PATHS}, got {n}"
        )
    x0 = as_vector(x0, "x0", R.rank)
    paths_cfg = cfg.model_copy(update={"record_path": False})
    trajectories = full_ensemble(
        R, k, x0, paths_cfg, n, method, root_order, trajectory_offset, threads=threads, use_cache=use_cache
    )
    labels = [t.final_angular.label for t in trajectories if t.final_angular is not None]
    excluded = n - len(labels)
    if excluded > MAX_UNDETERMINED_FRACTION * n:
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"{excluded} of {n} trajectories have no final angular part "
            f"(more than {MAX_UNDETERMINED_FRACTION:.0%}), use a longer horizon",
        )
    determined = len(labels)
    counts = {w.label: labels.count(w.label) for w in R.weyl_group}
    per_w = {}
    for label, count in counts.items():
        p = count / determined
        per_w[label] = McEstimate(
            value=p,
            stderr=math.sqrt(p * (1.0 - p) / determined),
            n=determined,
            seed=cfg.seed,
            excluded=excluded,
        )
    if excluded:
        logger.info(
            f" | Function | estimate_hw() | Check | {excluded} of {n} trajectories excluded as {UNDETERMINED}"
        )
    return HwTable(
        start=x0.tolist(),
        per_w=per_w,
        counts=counts,
        n_determined=determined,
        excluded=excluded,
        method=method,
    )


def hw_equivariance(
    R: RootSystem,
    table_x: HwTable,
    table_vx: HwTable,
    v: WeylElement,
    prefix: str = "equivariance",
) -> ExperimentReport:
    """Compare ``h_w(v x)`` with ``h_{v^-1 w}(x)`` for every w, within 3 joint standard errors.

    With ``v`` the identity and two tables from the same start this compares
    two estimates of one law, e.g. thinning against skew product.
    The joint standard error assumes the two tables come from disjoint
    trajectory ids.
    """
    v_inverse = R.inverse(v)
    checks = []
    for w in R.weyl_group:
        shifted = R.compose(v_inverse, w).label
        left, right = table_vx.per_w[w.label], table_x.per_w[shifted]
        z = _z_score(left.value - right.value, math.hypot(left.stderr, right.stderr))
        checks.append(
            CheckOutcome(
                name=f"{prefix}_{w.label}",
                statistic=z,
                threshold=Z_LIMIT,
                passed=z is not None and abs(z) <= Z_LIMIT,
            )
        )
    return ExperimentReport(
        experiment="hw_equivariance",
        estimates={
            "h_vx": {label: e.value for label, e in table_vx.per_w.items()},
            "h_x": {label: e.value for label, e in table_x.per_w.items()},
        },
        checks=checks,
        details={"v": v.label, "start_x": table_x.start, "start_vx": table_vx.start},
    )


# ---HARMONICITY---
@log_decorator(logger, level="info", suffix_message="Martingale check")
def martingale_check(
    f: ScalarField,
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    t: float,
    cfg: StepperConfig,
    n: int,
    method: str = "thinning",
    trajectory_offset: int = 0,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> ExperimentReport:
    """Compare the Monte Carlo mean of ``f(X_t)`` under the full process with ``f(x0)``.

    A zero sample variance is reported in the details and does not fail the
    check.
    """
    x0 = as_vector(x0, "x0", R.rank)
    if not t > 0:
        log_and_raise_error(logger, "error", ValueError, f"t = {t} must be > 0")
    paths_cfg = cfg.model_copy(update={"t_horizon": float(t), "record_path": False})
    trajectories = full_ensemble(
        R, k, x0, paths_cfg, n, method, None, trajectory_offset, threads=threads, use_cache=use_cache
    )
    values = f.evaluate_many(np.vstack([tr.terminal for tr in trajectories]))
    estimate = mc_estimate(values, cfg.seed)
    target = f(x0)
    difference = estimate.value - target
    degenerate = estimate.stderr == 0
    z = _z_score(difference, estimate.stderr)
    passed = True if degenerate else abs(z) < Z_LIMIT
    return ExperimentReport(
        experiment="martingale",
        estimates={"mean": estimate.value, "f_x0": target, "z": z},
        stderr={"mean": estimate.stderr},
        checks=[
            CheckOutcome(name=f"martingale_{f.name}_t{t:g}", statistic=z, threshold=Z_LIMIT, passed=passed)
        ],
        details={"n": n, "t": t, "method": method, "degenerate_variance": degenerate},
    )


# ---TRIVIAL RADIAL BOUNDARY---
def _invariant_panel(rank: int) -> List[Tuple[str, Callable[[np.ndarray], np.ndarray]]]:
    """Bounded functions of the radial part, each with sup norm 1."""
    panel = [
        (f"tanh_x{i + 1}", (lambda i: lambda points: np.tanh(points[:, i]))(i))
        for i in range(rank)
    ]
    panel.append(("exp_minus_norm", lambda points: np.exp(-np.linalg.norm(points, axis=1))))
    panel.append(("one", lambda points: np.ones(points.shape[0])))
    return panel


@log_decorator(logger, level="info", suffix_message="Trivial boundary experiment")
def theorem1_experiment(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    y0: VectorLike,
    cfg: StepperConfig,
    n: int,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> ExperimentReport:
    """Bound ``|E_x0 f(X_T) - E_y0 f(X_T)|`` by the mirror-coupling inequality.

    For each test function the difference of the two radial ensembles must be
    at most ``2 sup|f| P(no coupling by T)`` plus 3 combined standard errors.
    The bound is also reported at T/4 and T/2 and must not increase with time.
    """
    horizon = cfg.t_horizon
    checkpoints = (horizon / 4.0, horizon / 2.0, horizon)
    paths_cfg = cfg.model_copy(update={"record_path": False})
    xs = radial_checkpoint_ensemble(
        R, k, x0, paths_cfg, checkpoints, n, 0, threads=threads, use_cache=use_cache
    )
    ys = radial_checkpoint_ensemble(
        R, k, y0, paths_cfg, checkpoints, n, n, threads=threads, use_cache=use_cache
    )
    pair_cfg = cfg.model_copy(update={"run_to_horizon": False, "record_stride": 1_000})
    pairs = couple_ensemble(R, k, x0, y0, pair_cfg, n, 2 * n, threads=threads, use_cache=use_cache)
    summary = coupling_statistics(pairs)
    bounds = [2.0 * (1.0 - summary.fraction_coupled_by(t)) for t in checkpoints]

    checks, estimates, stderr = [], {}, {}
    for name, f in _invariant_panel(R.rank):
        fx = mc_estimate(f(xs[:, -1, :]), cfg.seed)
        fy = mc_estimate(f(ys[:, -1, :]), cfg.seed)
        difference = abs(fx.value - fy.value)
        joint = math.hypot(fx.stderr, fy.stderr)
        limit = bounds[-1] + Z_LIMIT * joint
        estimates[name] = difference
        stderr[name] = joint
        checks.append(
            CheckOutcome(name=f"coupling_bound_{name}", statistic=difference, threshold=limit, passed=difference <= limit)
        )
    monotone = all(a >= b for a, b in zip(bounds, bounds[1:]))
    checks.append(CheckOutcome(name="bound_monotone", statistic=bounds[-1], passed=monotone))
    return ExperimentReport(
        experiment="theorem1",
        estimates={"differences": estimates, "bound": bounds[-1], "fraction_coupled": summary.fraction_coupled_by(horizon)},
        stderr={"differences": stderr},
        checks=checks,
        details={"checkpoints": list(checkpoints), "bounds": bounds, "n": n},
    )


@log_decorator(logger, level="info", suffix_message="Coupling experiment")
def coupling_check(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    y0: VectorLike,
    cfg: StepperConfig,
    n: int,
    min_coupled_fraction: float = 0.99,
    qv_band: Tuple[float, float] = (0.9, 1.1),
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> Tuple[ExperimentReport, List]:
    """Fraction coupled by the horizon and the median normalised quadratic variation of the distance.

    Returns the report and the coupling records.
    """
    pairs = couple_ensemble(
        R, k, x0, y0, cfg.model_copy(update={"run_to_horizon": False}), n, 0,
        threads=threads, use_cache=use_cache,
    )
    summary = coupling_statistics(pairs)
    median_qv = summary.median_qv_rate
    checks = [
        CheckOutcome(
            name="coupled_fraction",
            statistic=summary.fraction_coupled,
            threshold=min_coupled_fraction,
            passed=summary.fraction_coupled >= min_coupled_fraction,
        ),
        CheckOutcome(
            name="median_qv_rate",
            statistic=median_qv,
            threshold=qv_band[1],
            passed=median_qv is not None and qv_band[0] <= median_qv <= qv_band[1],
        ),
    ]
    report = ExperimentReport(
        experiment="couple",
        estimates={
            "fraction_coupled": summary.fraction_coupled,
            "median_coupling_time": float(np.median(summary.coupling_times)) if summary.coupling_times else None,
            "median_qv_rate": median_qv,
            "median_drift_gap": summary.median_drift_gap,
        },
        checks=checks,
        details={"n": n, "n_coupled": summary.n_coupled, "qv_band": list(qv_band)},
    )
    return report, pairs


# ---BASIS CHANGE---
def fit_basis_change(
    h_id: Sequence[float],
    h_s: Sequence[float],
    h_stderr: Sequence[float],
    g_plus: Sequence[float],
    g_minus: Sequence[float],
) -> Dict[str, np.ndarray]:
    """Least-squares ``G_{w rho} = c_{w,id} h_id + c_{w,s} h_s`` for ``w rho = rho, -rho``.

    The residual of each point is weighted by the propagated Monte Carlo error
    ``|c_{w,id} - c_{w,s}| * stderr(h)`` (at least 1e-9), since ``h_s = 1 - h_id``.

    Returns:
        Mapping with ``matrix`` (rows rho, -rho), ``residuals`` and ``sigma``
        (one row per G), ``covariances`` (2x2 per row) and ``condition``.

    Raises:
        ValueError: If the design is ill-conditioned.

    """
    design = np.column_stack([np.asarray(h_id, dtype=float), np.asarray(h_s, dtype=float)])
    condition = float(np.linalg.cond(design))
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"ill-conditioned design (condition number {condition:.3g}), the grid must straddle both chambers",
        )
    se = np.asarray(h_stderr, dtype=float)
    rows, residuals, sigmas, covariances = [], [], [], []
    for target in (np.asarray(g_plus, dtype=float), np.asarray(g_minus, dtype=float)):
        first, *_ = np.linalg.lstsq(design, target, rcond=None)
        sigma = np.maximum(abs(first[0] - first[1]) * se, 1e-9)
        weighted = design / sigma[:, None]
        coefficients_, *_ = np.linalg.lstsq(weighted, target / sigma, rcond=None)
        rows.append(coefficients_)
        residuals.append(target - design @ coefficients_)
        sigmas.append(sigma)
        covariances.append(np.linalg.inv(weighted.T @ weighted))
    return {
        "matrix": np.vstack(rows),
        "residuals": np.vstack(residuals),
        "sigma": np.vstack(sigmas),
        "covariances": np.stack(covariances),
        "condition": condition,
    }


def _check_basis_grid(grid: Sequence[float]) -> np.ndarray:
    points = np.asarray(list(grid), dtype=float)
    if points.size < 4 or np.any(points == 0) or not (np.any(points > 0) and np.any(points < 0)):
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"grid {points.tolist()} must have at least 4 nonzero points on both sides of 0",
        )
    return points


@log_decorator(logger, level="info", suffix_message="Rank-one basis change")
def basis_change_rank1(
    p: Rank1Params,
    grid: Sequence[float] = DEFAULT_BASIS_GRID,
    cfg: Optional[StepperConfig] = None,
    n: int = 1000,
    method: str = "thinning",
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> ExperimentReport:
    """Estimate the 2x2 matrix expressing ``G_rho`` and ``G_-rho`` in the boundary functions ``h_id``, ``h_s``.

    ``h`` is estimated at each grid point, the oracle gives ``G`` and
    :func:`fit_basis_change` solves the regression. Standard errors of ``h``
    use the Jeffreys-smoothed frequency ``(count + 1/2) / (n + 1)`` so points
    where one element is never observed still carry weight.

    Raises:
        ValueError: If the grid does not straddle both chambers or the design is ill-conditioned.

    """
    cfg = cfg or StepperConfig()
    points = _check_basis_grid(grid)
    R = build_root_system("rank1", 1, p.alpha)
    identity, reflection = R.weyl_group[0].label, R.weyl_group[1].label

    h_id, h_s, h_se = [], [], []
    for i, x in enumerate(points):
        table = estimate_hw(
            R, p.k, [x], cfg, n, method, trajectory_offset=i * n, threads=threads, use_cache=use_cache
        )
        count, determined = table.counts[identity], table.n_determined
        smoothed = (count + 0.5) / (determined + 1.0)
        h_id.append(table.value(identity))
        h_s.append(table.value(reflection))
        h_se.append(math.sqrt(smoothed * (1.0 - smoothed) / determined))
    g_plus = np.atleast_1d(rank1_G(p, p.rho, points))
    g_minus = np.atleast_1d(rank1_G(p, -p.rho, points))
    fit = fit_basis_change(h_id, h_s, h_se, g_plus, g_minus)

    matrix = fit["matrix"]
    determinant = float(np.linalg.det(matrix))
    ratio = np.abs(fit["residuals"]) / fit["sigma"]
    checks = [
        CheckOutcome(
            name="residuals_within_3_sigma",
            statistic=float(np.max(ratio)),
            threshold=Z_LIMIT,
            passed=bool(np.all(ratio < Z_LIMIT)),
        ),
        CheckOutcome(
            name="determinant",
            statistic=determinant,
            threshold=MIN_DETERMINANT,
            passed=abs(determinant) > MIN_DETERMINANT,
        ),
    ]
    # Symmetrising either G over W gives F_rho = 1, so each row sums to 2,
    # and at the origin h_id = h_s = 1/2 must map to G(0) = 1.
    ones = np.ones(2)
    for row, label in zip(range(2), ("rho", "minus_rho")):
        spread = math.sqrt(float(ones @ fit["covariances"][row] @ ones))
        half_sum = float(matrix[row].sum()) / 2.0
        limit = Z_LIMIT * spread / 2.0 + 1e-8
        checks.append(
            CheckOutcome(
                name=f"symmetrised_row_{label}",
                statistic=half_sum - 1.0,
                threshold=limit,
                passed=abs(half_sum - 1.0) <= limit,
            )
        )
    return ExperimentReport(
        experiment="basis",
        estimates={
            "matrix": matrix.tolist(),
            "determinant": determinant,
            "h_id": h_id,
            "h_s": h_s,
        },
        stderr={
            "h": h_se,
            "matrix": [np.sqrt(np.diag(c)).tolist() for c in fit["covariances"]],
        },
        checks=checks,
        details={
            "grid": points.tolist(),
            "rows": ["G_rho", "G_minus_rho"],
            "columns": [identity, reflection],
            "residuals": fit["residuals"].tolist(),
            "condition_number": fit["condition"],
            "g_rho": g_plus.tolist(),
            "g_minus_rho": g_minus.tolist(),
        },
    )


# ---LAW OF LARGE NUMBERS---
@log_decorator(logger, level="info", suffix_message="Law of large numbers")
def lln_check(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    n: int,
    burn_in: float = 0.25,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> ExperimentReport:
    """Componentwise z-scores of ``mean(X_T / T)`` against rho.

    With ``burn_in = b > 0`` the slope ``(X_T - X_bT) / ((1 - b) T)`` is
    reported alongside. It drops the start-point and transient contribution
    that ``X_T / T`` carries at order ``1 / T``, but does not decide the checks.
    """
    if not 0.0 <= burn_in < 1.0:
        log_and_raise_error(logger, "error", ValueError, f"burn_in {burn_in} must be in [0, 1)")
    coeffs = coefficients(R, k)
    horizon = cfg.t_horizon
    paths_cfg = cfg.model_copy(update={"record_path": False})
    checkpoints = (burn_in * horizon, horizon) if burn_in > 0 else (horizon,)
    positions = radial_checkpoint_ensemble(
        R, coeffs.k, x0, paths_cfg, checkpoints, n, 0, threads=threads, use_cache=use_cache
    )
    velocity = positions[:, -1, :] / horizon

    target = coeffs.rho
    checks, means, errors = [], [], []
    for i in range(R.rank):
        estimate = mc_estimate(velocity[:, i], cfg.seed)
        z = _z_score(estimate.value - float(target[i]), estimate.stderr)
        means.append(estimate.value)
        errors.append(estimate.stderr)
        checks.append(
            CheckOutcome(
                name=f"velocity_component_{i + 1}",
                statistic=z,
                threshold=Z_LIMIT,
                passed=z is not None and abs(z) <= Z_LIMIT,
            )
        )
    estimates = {"velocity": means, "rho": target.tolist()}
    stderr = {"velocity": errors}
    if burn_in > 0:
        slope = (positions[:, 1, :] - positions[:, 0, :]) / ((1.0 - burn_in) * horizon)
        slopes = [mc_estimate(slope[:, i], cfg.seed) for i in range(R.rank)]
        estimates["slope_velocity"] = [e.value for e in slopes]
        stderr["slope_velocity"] = [e.stderr for e in slopes]
    return ExperimentReport(
        experiment="lln",
        estimates=estimates,
        stderr=stderr,
        checks=checks,
        details={"n": n, "horizon": horizon, "burn_in": burn_in},
    )


@log_decorator(logger, level="info", suffix_message="Diffusive scaling of the velocity")
def lln_variance_ratio(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    n: int,
    band: Tuple[float, float] = (0.5, 2.0),
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> ExperimentReport:
    """``T Var(X_T / T)`` at T and 4T must agree within a factor given by ``band``."""
    horizon = cfg.t_horizon
    positions = radial_checkpoint_ensemble(
        R, k, x0, cfg.model_copy(update={"record_path": False}), (horizon, 4.0 * horizon),
        n, 0, threads=threads, use_cache=use_cache,
    )
    scaled_short = np.var(positions[:, 0, :] / horizon, axis=0, ddof=1) * horizon
    scaled_long = np.var(positions[:, 1, :] / (4.0 * horizon), axis=0, ddof=1) * 4.0 * horizon
    ratios = scaled_short / scaled_long
    checks = [
        CheckOutcome(
            name=f"variance_ratio_component_{i + 1}",
            statistic=float(ratio),
            threshold=band[1],
            passed=bool(band[0] <= ratio <= band[1]),
        )
        for i, ratio in enumerate(ratios)
    ]
    return ExperimentReport(
        experiment="lln_variance_ratio",
        estimates={"ratios": ratios.tolist()},
        checks=checks,
        details={"horizons": [horizon, 4.0 * horizon], "n": n},
    )


def lln_drift_only(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    relative_tolerance: float = 1e-2,
) -> ExperimentReport:
    """With the noise off the flow of the drift moves along rho asymptotically."""
    coeffs = coefficients(R, k)
    horizon = cfg.t_horizon
    flow_cfg = cfg.model_copy(update={"noise_scale": 0.0, "record_path": False})
    half, end = simulate_radial_checkpoints(R, coeffs.k, x0, flow_cfg, (horizon / 2.0, horizon))
    velocity = (end - half) / (horizon / 2.0)
    error = float(np.linalg.norm(velocity - coeffs.rho))
    limit = relative_tolerance * float(np.linalg.norm(coeffs.rho))
    return ExperimentReport(
        experiment="lln_drift_only",
        estimates={"velocity": velocity.tolist(), "rho": coeffs.rho.tolist()},
        checks=[CheckOutcome(name="drift_flow_velocity", statistic=error, threshold=limit, passed=error <= limit)],
        details={"horizon": horizon},
    )


# ---NEVER JUMPING---
def _no_jump_worker(task) -> Tuple[float, float]:
    R, k, radial_start, cfg, trajectory_id = task
    coeffs = coefficients(R, k)
    path = simulate_radial(R, coeffs.k, radial_start, cfg, trajectory_id)
    rates = cfg.rate_scale * coeffs.rates(path.positions).sum(axis=1)
    integral = float(np.sum(rates[:-1] * np.diff(path.times)))
    return integral, float(rates[-1])


@log_decorator(logger, level="info", suffix_message="Never-jump probability")
def no_jump_probability(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    n: int,
    threads: Optional[int] = None,
) -> ExperimentReport:
    """``P_x0[X never jumps]`` as the mean of ``exp(-int total jump rate along the radial path)``.

    Conditioning on the radial path removes the jump-time noise. The mean
    residual intensity at the horizon bounds the probability mass still missing.
    """
    radial_start = radial_decompose(R, x0).radial
    dense = cfg.model_copy(update={"record_path": True, "record_stride": 1})
    results = ordered_map(
        _no_jump_worker, [(R, k, radial_start, dense, i) for i in range(n)], threads=threads
    )
    integrals = np.array([r[0] for r in results])
    residuals = np.array([r[1] for r in results])
    estimate = mc_estimate(np.exp(-integrals), cfg.seed)
    mean_residual = float(np.mean(residuals))
    return ExperimentReport(
        experiment="no_jump_probability",
        estimates={"no_jump_probability": estimate.value, "mean_residual_intensity": mean_residual},
        stderr={"no_jump_probability": estimate.stderr},
        checks=[
            CheckOutcome(
                name="residual_intensity",
                statistic=mean_residual,
                threshold=cfg.residual_intensity_tol,
                passed=mean_residual < cfg.residual_intensity_tol,
            )
        ],
        details={"n": n, "horizon": cfg.t_horizon},
    )
