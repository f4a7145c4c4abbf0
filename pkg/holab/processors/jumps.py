"""Simulation of the full jump process by two constructions, and their comparison.

The full process has generator half the Heckman-Opdam Laplacian: it diffuses
like the radial process inside a chamber copy and jumps ``x -> r_a x`` across
the wall of ``a`` at rate ``c_a(x) / 2``.

* Thinning steps the process in the ambient frame and fires each root with
  probability ``1 - exp(-rate * dt)``, at most one jump per step.
* The skew product simulates the radial path first and inserts the jumps root
  by root in a fixed order ``a_1, a_2, ...``: ``X^{j+1}`` jumps across ``a_{j+1}``
  when ``A^j_t = int_0^t c_{a_{j+1}}(X^j_s) ds`` crosses the next mark of an
  Exp(1/2) sequence, and continues from the reflected point as a fresh copy of
  ``X^j``. A jump left-multiplies the angular part by ``r_{a_{j+1}}``.

Both constructions return a :class:`FullTrajectory`.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from holab.processors.diffusion import (
    CouplingRecord,
    TrajectoryRecord,
    _euler_step,
    mirror_couple,
    simulate_radial,
)
from holab.processors.ho_operators import HoCoefficients, coefficients
from holab.processors.rootsys import RootSystem, WeylElement, radial_decompose
from holab.tools.caching import ensemble_cache
from holab.tools.logging_ import (
    JumpsLogger,
    log_decorator,
    log_and_raise_error,
)
from holab.tools.parallel import ordered_map
from holab.tools.rng import NORMALS, UNIFORMS, KeyedStream, MarkStream
from holab.validation.data_types import Multiplicities, VectorLike, as_vector
from holab.validation.validators import CheckOutcome, ExperimentReport, StepperConfig

logger = JumpsLogger().setup()

METHODS = ("thinning", "skew")
MIN_COMPARISON_PATHS = 1000
MARK_RATE = 0.5
SIGNIFICANCE = 0.01
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class JumpEvent:
    """A reflection jump, ``after == r_root(before)``."""

    time: float
    root: int
    before: np.ndarray = field(repr=False)
    after: np.ndarray = field(repr=False)


@dataclass
class ClockState:
    """Additive-functional clocks of the skew-product construction at the horizon.

    Attributes:
        root_order: Positive-root indices in jump-insertion order.
        A: Value of each clock at the horizon, finite for every path.
        next_thresholds: First unconsumed cumulative mark of each clock.

    """

    root_order: Tuple[int, ...]
    A: np.ndarray
    next_thresholds: np.ndarray


@dataclass
class FullTrajectory:
    """A path of the full process with its jumps and angular part.

    ``base`` holds the recorded positions in the ambient frame.
    ``angular_indices`` gives, per recorded point, the index in ``R.weyl_group``
    of the angular part. ``angular_path`` lists ``(time, element)`` at the start
    and after every jump. ``final_angular`` is set only when no jump happened in
    the trailing stationarity window and the residual intensity is below
    tolerance.
    """

    base: TrajectoryRecord
    jumps: List[JumpEvent]
    angular_indices: np.ndarray = field(repr=False)
    angular_path: List[Tuple[float, WeylElement]] = field(repr=False)
    final_angular: Optional[WeylElement]
    terminal_angular: WeylElement
    residual_intensity: float
    method: str
    horizon: float
    clock: Optional[ClockState] = None

    @property
    def jump_count(self) -> int:
        return len(self.jumps)

    @property
    def jump_times(self) -> np.ndarray:
        return np.array([event.time for event in self.jumps])

    @property
    def terminal(self) -> np.ndarray:
        return self.base.terminal

    def angular_at(self, t: float) -> WeylElement:
        """Angular part in effect at time ``t``."""
        current = self.angular_path[0][1]
        for time_, element in self.angular_path[1:]:
            if time_ <= t:
                current = element
            else:
                break
        return current


def _regular_start(coeffs: HoCoefficients, x0: VectorLike) -> np.ndarray:
    x = as_vector(x0, "x0", coeffs.R.rank)
    margins = coeffs.margins(x)
    if np.any(np.abs(margins) <= 1e-12 * (1.0 + float(np.linalg.norm(x)))):
        log_and_raise_error(
            logger, "error", ValueError, f"x0 = {x.tolist()} is not a regular point"
        )
    return x


def _finalise(
    R: RootSystem,
    coeffs: HoCoefficients,
    cfg: StepperConfig,
    base: TrajectoryRecord,
    jumps: List[JumpEvent],
    angular_indices: np.ndarray,
    angular_path: List[Tuple[float, WeylElement]],
    method: str,
    radial_terminal: np.ndarray,
    clock: Optional[ClockState] = None,
) -> FullTrajectory:
    terminal_angular = angular_path[-1][1]
    residual = float(cfg.rate_scale * np.sum(coeffs.rates(radial_terminal)))
    window_start = cfg.t_horizon * (1.0 - cfg.stationarity_window)
    quiet = not jumps or jumps[-1].time <= window_start
    final = terminal_angular if quiet and residual < cfg.residual_intensity_tol else None
    return FullTrajectory(
        base=base,
        jumps=jumps,
        angular_indices=angular_indices,
        angular_path=angular_path,
        final_angular=final,
        terminal_angular=terminal_angular,
        residual_intensity=residual,
        method=method,
        horizon=cfg.t_horizon,
        clock=clock,
    )


# ---THINNING---
def simulate_thinning(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    trajectory_id: int = 0,
) -> FullTrajectory:
    """Full process by per-step thinning in the ambient frame.

    Each accepted diffusion step has ``dt`` capped so that total intensity
    times ``dt`` is at most ``intensity_cap``. Root ``a`` fires with probability
    ``1 - exp(-rate_scale * c_a(x) / 2 * dt)`` against its own uniform, and
    when several fire the smallest uniform wins.

    Raises:
        ValueError: If ``x0`` is not regular.
        RuntimeError: On wall contact.

    """
    coeffs = coefficients(R, k)
    x = _regular_start(coeffs, x0)
    w = radial_decompose(R, x).angular
    normals = KeyedStream(cfg.seed, NORMALS, trajectory_id, R.rank)
    uniforms = KeyedStream(cfg.seed, UNIFORMS, trajectory_id, R.n_positive, kind="uniform")

    t, horizon = 0.0, cfg.t_horizon
    times, positions, indices = [0.0], [x], [w.index]
    angular_path: List[Tuple[float, WeylElement]] = [(0.0, w)]
    jumps: List[JumpEvent] = []
    wall_min = float(np.min(np.abs(coeffs.margins(x))))
    steps = rejections = 0
    while horizon - t > 1e-12 * max(1.0, horizon):
        rates = cfg.rate_scale * coeffs.rates(x)
        total = float(np.sum(rates))
        step_max = min(cfg.dt_max, horizon - t)
        if total > 0:
            step_max = min(step_max, cfg.intensity_cap / total)
        x, dt_eff, rejected = _euler_step(coeffs, x, step_max, normals.next(), cfg, normals)
        t += dt_eff
        steps += 1
        rejections += rejected

        marks = uniforms.next()
        fired = marks < -np.expm1(-rates * dt_eff)
        jumped = bool(np.any(fired))
        if jumped:
            root = int(np.argmin(np.where(fired, marks, np.inf)))
            after = coeffs.reflect(root, x)
            jumps.append(JumpEvent(time=t, root=root, before=x, after=after))
            x = after
            w = R.left_reflect(w, root)
            angular_path.append((t, w))
        wall_min = min(wall_min, float(np.min(np.abs(coeffs.margins(x)))))
        if cfg.record_path and (jumped or steps % cfg.record_stride == 0):
            times.append(t)
            positions.append(x)
            indices.append(w.index)
    if times[-1] != t:
        times.append(t)
        positions.append(x)
        indices.append(w.index)

    base = TrajectoryRecord(
        times=np.asarray(times),
        positions=np.vstack(positions),
        terminal=x,
        wall_min=wall_min,
        trajectory_id=trajectory_id,
        steps=steps,
        rejections=rejections,
    )
    radial_terminal = w.matrix.T @ x
    return _finalise(
        R, coeffs, cfg, base, jumps, np.asarray(indices), angular_path, "thinning", radial_terminal
    )


# ---SKEW PRODUCT---
def _check_order(R: RootSystem, root_order: Optional[Sequence[int]]) -> Tuple[int, ...]:
    if root_order is None:
        return tuple(range(R.n_positive))
    order = tuple(int(i) for i in root_order)
    if sorted(order) != list(range(R.n_positive)):
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"root_order {list(order)} is not a permutation of the {R.n_positive} positive roots",
        )
    return order


def _dense(cfg: StepperConfig) -> StepperConfig:
    return cfg.model_copy(update={"record_path": True, "record_stride": 1})


@dataclass
class _LevelSweep:
    """Jumps of every level along one radial path.

    ``changes`` holds ``(grid index, element)`` with the element in effect from
    that index on, ``events`` holds ``(time, level, cell, element before)``.
    """

    changes: List[Tuple[int, WeylElement]]
    events: List[Tuple[float, int, int, WeylElement]]
    clocks: np.ndarray
    thresholds: np.ndarray


def _sweep_levels(
    R: RootSystem,
    coeffs: HoCoefficients,
    radial: TrajectoryRecord,
    w0: WeylElement,
    order: Tuple[int, ...],
    marks: MarkStream,
    cfg: StepperConfig,
) -> _LevelSweep:
    """Insert the jumps of ``order[0]``, ``order[1]``, ... level by level.

    Level ``j`` runs the clock ``A^j = int c_{order[j]}(X^j_s) ds`` against the
    cumulative Exp(1/2) marks of label ``j``, and ``X^{j+1}`` is ``X^j`` glued to
    a fresh copy of ``X^j`` started at ``r_{order[j]} X^j`` at every crossing.
    Between two of its own crossings ``X^{j+1}`` is a copy of ``X^j``, and
    ``c_{order[j]}`` is invariant under its own reflection, so every clock
    integrates along the current glued path. The fresh copy reuses the radial
    remainder reflected into the new chamber and the residual marks of the lower
    levels, so all levels advance together in one sweep over the grid.

    Clock increments use the left grid point. Crossings inside one step are
    applied in time order and take effect at the end of the step.
    """
    times, points = radial.times, radial.positions
    steps = np.diff(times)
    last = len(times) - 1
    roots = list(order)
    levels = len(order)
    clocks = np.zeros(levels)
    thresholds = np.array([marks.next(level) for level in range(levels)])
    counts = np.zeros(levels, dtype=int)
    w, start = w0, 0
    changes: List[Tuple[int, WeylElement]] = [(0, w0)]
    events: List[Tuple[float, int, int, WeylElement]] = []
    while start < last:
        rates = cfg.rate_scale * coeffs.full_coefficients(w.act(points[start:last]))[:, roots]
        running = clocks + np.vstack(
            [np.zeros(levels), np.cumsum(rates * steps[start:, None], axis=0)]
        )
        if not np.all(np.isfinite(running[-1])):
            log_and_raise_error(
                logger,
                "error",
                RuntimeError,
                f"additive functionals are not finite: {running[-1].tolist()}",
            )
        crossed = running[-1] >= thresholds
        if not np.any(crossed):
            clocks = running[-1]
            break
        # first grid row at which each level reaches its next threshold
        rows = np.array(
            [
                np.searchsorted(running[:, level], thresholds[level], side="left")
                if crossed[level]
                else len(running)
                for level in range(levels)
            ]
        )
        row = int(np.min(rows))
        cell = start + row - 1

        inside: List[Tuple[float, int]] = []
        for level in np.flatnonzero(rows == row):
            low, high = running[row - 1, level], running[row, level]
            while thresholds[level] <= high:
                counts[level] += 1
                if counts[level] > cfg.max_jumps:
                    log_and_raise_error(
                        logger,
                        "error",
                        RuntimeError,
                        f"root {roots[level]} jumped more than max_jumps = {cfg.max_jumps} times",
                    )
                fraction = (thresholds[level] - low) / (high - low)
                inside.append((float(times[cell] + fraction * steps[cell]), int(level)))
                thresholds[level] += marks.next(int(level))
        for time_, level in sorted(inside):
            events.append((time_, level, cell, w))
            w = R.left_reflect(w, roots[level])

        clocks = running[row]
        start = cell + 1
        changes.append((start, w))
    return _LevelSweep(changes=changes, events=events, clocks=clocks, thresholds=thresholds)


def simulate_skew_product(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    root_order: Optional[Sequence[int]] = None,
    trajectory_id: int = 0,
    marks: Optional[MarkStream] = None,
    radial: Optional[TrajectoryRecord] = None,
) -> FullTrajectory:
    """Full process built from the radial path by adding the jumps of one root at a time.

    ``X^0`` is the radial path carried into the chamber of ``x0``. ``X^{j+1}``
    adds to ``X^j`` the jumps across ``order[j]``, fired when ``A^j`` crosses
    an Exp(1/2) mark, and the output is the last level.

    Args:
        R: Root system.
        k: Multiplicities.
        x0: Regular start point.
        cfg: Stepper configuration.
        root_order: Permutation of the positive-root indices, identity by default.
            Marks are keyed by level, the position in this order.
        trajectory_id: Key of the random streams.
        marks: Mark source, defaults to the keyed stream of ``trajectory_id``.
            Coupled constructions pass equal streams.
        radial: A radial path from the radial part of ``x0`` on a full grid,
            simulated here when omitted.

    Raises:
        ValueError: On a bad root order or a non-regular start.
        RuntimeError: If a root jumps more than ``cfg.max_jumps`` times or on wall contact.

    """
    coeffs = coefficients(R, k)
    x = _regular_start(coeffs, x0)
    order = _check_order(R, root_order)
    decomposition = radial_decompose(R, x)
    w0 = decomposition.angular
    if radial is None:
        radial = simulate_radial(R, coeffs.k, decomposition.radial, _dense(cfg), trajectory_id)
    marks = marks or MarkStream(cfg.seed, trajectory_id, MARK_RATE)

    sweep = _sweep_levels(R, coeffs, radial, w0, order, marks, cfg)

    angular_path: List[Tuple[float, WeylElement]] = [(0.0, w0)]
    jumps: List[JumpEvent] = []
    for time_, level, cell, w in sweep.events:
        t0, t1 = radial.times[cell], radial.times[cell + 1]
        fraction = 0.0 if t1 <= t0 else (time_ - t0) / (t1 - t0)
        radial_point = (1.0 - fraction) * radial.positions[cell] + fraction * radial.positions[cell + 1]
        before = w.act(radial_point)
        root = order[level]
        jumps.append(
            JumpEvent(time=time_, root=root, before=before, after=coeffs.reflect(root, before))
        )
        angular_path.append((time_, R.left_reflect(w, root)))

    n_points = len(radial.times)
    indices = np.empty(n_points, dtype=int)
    positions = np.empty_like(radial.positions)
    bounds = [index for index, _ in sweep.changes[1:]] + [n_points]
    for (first, w), end in zip(sweep.changes, bounds):
        indices[first:end] = w.index
        positions[first:end] = w.act(radial.positions[first:end])

    keep = np.arange(n_points)
    if not cfg.record_path:
        keep = np.array([0, n_points - 1])
    elif cfg.record_stride > 1:
        keep = np.unique(np.append(keep[:: cfg.record_stride], n_points - 1))

    base = TrajectoryRecord(
        times=radial.times[keep],
        positions=positions[keep],
        terminal=positions[-1],
        wall_min=radial.wall_min,
        trajectory_id=trajectory_id,
        steps=radial.steps,
        rejections=radial.rejections,
    )
    clock = ClockState(root_order=order, A=sweep.clocks, next_thresholds=sweep.thresholds)
    return _finalise(
        R, coeffs, cfg, base, jumps, indices[keep], angular_path, "skew", radial.terminal, clock
    )


# ---ENSEMBLES---
def _full_worker(task) -> FullTrajectory:
    R, k, x0, cfg, method, root_order, trajectory_id = task
    if method == "thinning":
        return simulate_thinning(R, k, x0, cfg, trajectory_id)
    return simulate_skew_product(R, k, x0, cfg, root_order, trajectory_id)


@ensemble_cache()
@log_decorator(logger, level="info", suffix_message="Simulate full-process ensemble")
def full_ensemble(
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
) -> List[FullTrajectory]:
    """``n`` independent full-process paths by the chosen construction."""
    if method not in METHODS:
        log_and_raise_error(
            logger, "error", ValueError, f"method '{method}' is not one of {METHODS}"
        )
    order = None if root_order is None else tuple(root_order)
    tasks = [(R, k, x0, cfg, method, order, trajectory_offset + i) for i in range(n)]
    return ordered_map(_full_worker, tasks, threads=threads)


# ---COUPLED FULL PROCESSES---
@dataclass
class FullCouplingRecord:
    """Two full processes built on a mirror-coupled radial pair with shared jump marks.

    ``merge_time`` is the first time from which the two paths coincide until
    the horizon, ``None`` when they differ at the horizon.
    """

    x: FullTrajectory
    y: FullTrajectory
    radial: CouplingRecord = field(repr=False)
    neither_jumped: bool
    merged: bool
    merge_time: Optional[float]


def couple_full(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    y0: VectorLike,
    cfg: StepperConfig,
    trajectory_id: int = 0,
    root_order: Optional[Sequence[int]] = None,
) -> FullCouplingRecord:
    """Mirror-couple the radial parts, then insert jumps in both with the same marks.

    Raises:
        ValueError: If ``x0`` and ``y0`` are not regular points of the same chamber copy.

    """
    coeffs = coefficients(R, k)
    x = _regular_start(coeffs, x0)
    y = _regular_start(coeffs, y0)
    dx, dy = radial_decompose(R, x), radial_decompose(R, y)
    if dx.angular != dy.angular:
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"x0 and y0 lie in different chambers ({dx.angular.label} and {dy.angular.label})",
        )
    dense = _dense(cfg).model_copy(update={"run_to_horizon": True})
    pair = mirror_couple(R, coeffs.k, dx.radial, dy.radial, dense, trajectory_id)

    full = []
    for path, start in ((pair.x_path, x), (pair.y_path, y)):
        full.append(
            simulate_skew_product(
                R,
                coeffs.k,
                start,
                dense,
                root_order,
                trajectory_id,
                marks=MarkStream(cfg.seed, trajectory_id, MARK_RATE),
                radial=path,
            )
        )
    full_x, full_y = full

    same = np.all(full_x.base.positions == full_y.base.positions, axis=1)
    same &= full_x.angular_indices == full_y.angular_indices
    merged = bool(same[-1])
    merge_time = None
    if merged:
        differing = np.flatnonzero(~same)
        first = 0 if differing.size == 0 else int(differing[-1]) + 1
        merge_time = float(full_x.base.times[first])
    return FullCouplingRecord(
        x=full_x,
        y=full_y,
        radial=pair,
        neither_jumped=full_x.jump_count == 0 and full_y.jump_count == 0,
        merged=merged,
        merge_time=merge_time,
    )


def _couple_full_worker(task) -> FullCouplingRecord:
    R, k, x0, y0, cfg, root_order, trajectory_id = task
    return couple_full(R, k, x0, y0, cfg, trajectory_id, root_order)


@ensemble_cache()
@log_decorator(logger, level="info", suffix_message="Simulate coupled full processes")
def couple_full_ensemble(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    y0: VectorLike,
    cfg: StepperConfig,
    n: int,
    root_order: Optional[Sequence[int]] = None,
    trajectory_offset: int = 0,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> List[FullCouplingRecord]:
    """``n`` independent coupled full-process pairs."""
    order = None if root_order is None else tuple(root_order)
    tasks = [(R, k, x0, y0, cfg, order, trajectory_offset + i) for i in range(n)]
    return ordered_map(_couple_full_worker, tasks, threads=threads)


# ---COMPARISON---
def projection_directions(rank: int, count: int = 5) -> np.ndarray:
    """Fixed unit directions for projecting terminal points; ``[[1]]`` in rank one."""
    if rank == 1:
        return np.ones((1, 1))
    raw = np.random.default_rng(20_240_601).standard_normal((count, rank))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def _angular_labels(trajectories: Sequence[FullTrajectory]) -> List[str]:
    return [
        UNDETERMINED if t.final_angular is None else t.final_angular.label
        for t in trajectories
    ]


def _jump_bins(trajectories: Sequence[FullTrajectory]) -> List[str]:
    return [str(t.jump_count) if t.jump_count < 3 else "3+" for t in trajectories]


def _contingency(labels_a: List[str], labels_b: List[str]) -> Tuple[float, float, Dict[str, List[int]]]:
    """Chi-square homogeneity test on two categorical samples, empty categories dropped."""
    categories = sorted(set(labels_a) | set(labels_b))
    table = np.array(
        [[labels.count(c) for c in categories] for labels in (labels_a, labels_b)]
    )
    counts = {c: table[:, i].tolist() for i, c in enumerate(categories)}
    if table.shape[1] < 2:
        return 0.0, 1.0, counts
    result = stats.chi2_contingency(table, correction=False)
    return float(result[0]), float(result[1]), counts


@log_decorator(logger, level="info", suffix_message="Compare two constructions")
def compare_constructions(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    n_paths: int,
    method_a: str = "thinning",
    method_b: str = "skew",
    rate_scale_b: Optional[float] = None,
    root_order_a: Optional[Sequence[int]] = None,
    root_order_b: Optional[Sequence[int]] = None,
    trajectory_offset: int = 0,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> ExperimentReport:
    """Two-sample tests between ensembles of two constructions (or one construction split in two).

    Tests: KS on projections of the terminal point (and on ``|X_T|`` in rank
    one), chi-square on the final angular part with undetermined paths as a
    category, chi-square on jump counts binned 0/1/2/3+, and KS on first-jump
    times when both samples have at least 5. Each passes when its p-value
    exceeds ``0.01`` divided by the number of tests.

    ``rate_scale_b`` multiplies every jump rate of the second ensemble, used
    as a power check of the harness. The two samples take the trajectory ids
    ``trajectory_offset + [0, n_paths)`` and ``trajectory_offset + [n_paths, 2 n_paths)``.

    Raises:
        ValueError: With fewer than 1000 paths.

    """
    if n_paths < MIN_COMPARISON_PATHS:
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"compare_constructions needs n_paths >= {MIN_COMPARISON_PATHS}, got {n_paths}",
        )
    cfg_a = cfg.model_copy(update={"record_path": False})
    cfg_b = cfg_a
    if rate_scale_b is not None:
        cfg_b = cfg_a.model_copy(update={"rate_scale": float(rate_scale_b)})
    sample_a = full_ensemble(
        R, k, x0, cfg_a, n_paths, method_a, root_order_a, trajectory_offset,
        threads=threads, use_cache=use_cache,
    )
    sample_b = full_ensemble(
        R, k, x0, cfg_b, n_paths, method_b, root_order_b, trajectory_offset + n_paths,
        threads=threads, use_cache=use_cache,
    )

    terminal_a = np.vstack([t.terminal for t in sample_a])
    terminal_b = np.vstack([t.terminal for t in sample_b])
    raw: List[Tuple[str, float, float]] = []
    for i, direction in enumerate(projection_directions(R.rank)):
        result = stats.ks_2samp(terminal_a @ direction, terminal_b @ direction)
        raw.append((f"ks_projection_{i}", float(result.statistic), float(result.pvalue)))
    if R.rank == 1:
        result = stats.ks_2samp(np.abs(terminal_a[:, 0]), np.abs(terminal_b[:, 0]))
        raw.append(("ks_radial_norm", float(result.statistic), float(result.pvalue)))

    chi_angular, p_angular, angular_counts = _contingency(
        _angular_labels(sample_a), _angular_labels(sample_b)
    )
    raw.append(("chi2_final_angular", chi_angular, p_angular))
    chi_jumps, p_jumps, jump_counts = _contingency(_jump_bins(sample_a), _jump_bins(sample_b))
    raw.append(("chi2_jump_counts", chi_jumps, p_jumps))

    first_a = [t.jumps[0].time for t in sample_a if t.jumps]
    first_b = [t.jumps[0].time for t in sample_b if t.jumps]
    skipped = []
    if len(first_a) >= 5 and len(first_b) >= 5:
        result = stats.ks_2samp(first_a, first_b)
        raw.append(("ks_first_jump_time", float(result.statistic), float(result.pvalue)))
    else:
        skipped.append("ks_first_jump_time")

    threshold = SIGNIFICANCE / len(raw)
    checks = [
        CheckOutcome(name=name, statistic=statistic, p=p, threshold=threshold, passed=p > threshold)
        for name, statistic, p in raw
    ]
    report = ExperimentReport(
        experiment="equivalence",
        estimates={
            "mean_jumps_a": float(np.mean([t.jump_count for t in sample_a])),
            "mean_jumps_b": float(np.mean([t.jump_count for t in sample_b])),
        },
        checks=checks,
        details={
            "n_paths": n_paths,
            "method_a": method_a,
            "method_b": method_b,
            "rate_scale_b": rate_scale_b,
            "bonferroni_threshold": threshold,
            "final_angular_counts": angular_counts,
            "jump_count_bins": jump_counts,
            "skipped": skipped,
        },
    )
    logger.info(
        f" | Function | compare_constructions() | Action | {method_a} vs {method_b} | "
        f"{'pass' if report.passed else 'FAIL ' + ','.join(report.failures())}"
    )
    return report


def jump_window_counts(
    trajectories: Sequence[FullTrajectory], windows: Sequence[Tuple[float, float]]
) -> pd.DataFrame:
    """Mean number of jumps per path in each half-open window ``[start, end)``."""
    rows = []
    for start, end in windows:
        counts = np.array(
            [int(np.sum((t.jump_times >= start) & (t.jump_times < end))) for t in trajectories]
        )
        stderr = float(np.std(counts, ddof=1) / np.sqrt(len(counts))) if len(counts) > 1 else 0.0
        rows.append(
            {"start": start, "end": end, "mean_jumps": float(np.mean(counts)), "stderr": stderr}
        )
    return pd.DataFrame(rows, columns=["start", "end", "mean_jumps", "stderr"])


def trajectory_frame(R: RootSystem, trajectory: FullTrajectory) -> pd.DataFrame:
    """Recorded path as a table: t, x1..xn, angular_word, jump_flag."""
    times = trajectory.base.times
    frame = pd.DataFrame({"t": times})
    for i in range(R.rank):
        frame[f"x{i + 1}"] = trajectory.base.positions[:, i]
    frame["angular_word"] = [R.weyl_group[i].label for i in trajectory.angular_indices]
    flags = np.zeros(len(times), dtype=int)
    for jump_time in trajectory.jump_times:
        slot = int(np.searchsorted(times, jump_time, side="left"))
        if slot < len(times):
            flags[slot] = 1
    frame["jump_flag"] = flags
    return frame
