"""Simulation of the radial process and of mirror-coupled pairs of radial processes.

The radial process is the diffusion with generator half the radial Laplacian,
living in the open positive chamber. It is stepped by Euler-Maruyama with an
adaptive step: ``dt_eff = min(dt_max, wall_safety * d^2)`` where ``d`` is the
Euclidean distance to the nearest wall. A proposal leaving the chamber is
rejected. The rejected piece is split at its midpoint with a Brownian bridge
draw and both halves are proposed, so the Brownian increment of the step is
kept. Mirror-coupled pairs retry on half the step with a fresh draw instead.

Gaussian increments come from :class:`holab.tools.rng.KeyedStream`, keyed by
``(seed, stream, trajectory_id)``, so ensembles are bit-identical whatever the
thread budget.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
import math

import numpy as np

from holab.processors.ho_operators import HoCoefficients, coefficients
from holab.processors.rootsys import RootSystem
from holab.tools.caching import ensemble_cache
from holab.tools.logging_ import (
    DiffusionLogger,
    log_decorator,
    log_and_raise_error,
)
from holab.tools.parallel import ordered_map
from holab.tools.rng import NORMALS, KeyedStream
from holab.validation.data_types import Multiplicities, VectorLike, as_vector
from holab.validation.validators import CouplingSummary, StepperConfig

logger = DiffusionLogger().setup()


@dataclass
class TrajectoryRecord:
    """One simulated path.

    Attributes:
        times: Increasing recorded times, ``times[0]`` is the start time.
        positions: Recorded positions, one row per time.
        terminal: Position at the last time.
        wall_min: Running minimum over time and positive roots of ``|<a, X_t>|``.
        trajectory_id: Key of the random streams that drove the path.
        steps: Accepted steps.
        rejections: Rejected proposals.

    """

    times: np.ndarray
    positions: np.ndarray = field(repr=False)
    terminal: np.ndarray
    wall_min: float
    trajectory_id: int = 0
    steps: int = 0
    rejections: int = 0


@dataclass
class CouplingRecord:
    """A mirror-coupled pair and the diagnostics of its distance process.

    ``z`` is ``|Y - X|`` on ``z_times``, zero from ``coupling_time`` onward.
    ``qv`` is the realised quadratic variation of z up to coupling (or the
    horizon) and ``qv_rate`` normalises it by ``4 * noise_scale^2`` times that
    window, so it is close to 1. ``drift_gap_sup`` is
    ``sup_t |int_0^t (b(Y_s) - b(X_s)) ds|``.
    """

    x_path: TrajectoryRecord
    y_path: TrajectoryRecord
    z_times: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    coupling_time: Optional[float]
    qv: float
    qv_rate: Optional[float]
    drift_gap_sup: float
    trajectory_id: int = 0

    @property
    def coupled(self) -> bool:
        return self.coupling_time is not None


# ---STEPPING---
def _wall_contact(x: np.ndarray, dt: float, attempts: int):
    log_and_raise_error(
        logger,
        "error",
        RuntimeError,
        f"wall contact: step from {x.tolist()} rejected {attempts} times, last dt {dt:.3e}",
    )


def _euler_step(
    coeffs: HoCoefficients,
    x: np.ndarray,
    dt: float,
    g: np.ndarray,
    cfg: StepperConfig,
    stream: Optional[KeyedStream] = None,
) -> Tuple[np.ndarray, float, int]:
    """One accepted step inside the chamber copy containing ``x``.

    ``dt`` is the largest step allowed by the caller (``dt_max`` or the time
    left). Returns the new point, the step used and the number of rejections.

    With a ``stream`` the Brownian increment ``sqrt(dt_eff) g`` is kept: a
    rejected piece is split at its midpoint by a Brownian bridge draw and both
    halves are proposed in turn, so the step always covers ``dt_eff``. Without
    one the whole step is retried on half the time with the same ``g``.
    """
    signs = np.sign(coeffs.margins(x))
    dt_eff = min(dt, cfg.wall_safety * coeffs.wall_distance(x) ** 2)
    if stream is None:
        b = coeffs.drift(x)
        for attempt in range(cfg.max_rejections + 1):
            proposal = x + b * dt_eff + cfg.noise_scale * math.sqrt(dt_eff) * g
            if np.all(signs * coeffs.margins(proposal) > 0):
                return proposal, dt_eff, attempt
            dt_eff *= 0.5
        _wall_contact(x, dt_eff, cfg.max_rejections + 1)

    pending = [(dt_eff, math.sqrt(dt_eff) * np.asarray(g, dtype=float))]
    rejections = 0
    while pending:
        h, dw = pending.pop()
        proposal = x + coeffs.drift(x) * h + cfg.noise_scale * dw
        if np.all(signs * coeffs.margins(proposal) > 0):
            x = proposal
            continue
        rejections += 1
        if rejections > cfg.max_rejections:
            _wall_contact(x, h, rejections)
        # W(h/2) given W(h) = dw is N(dw/2, h/4)
        first = 0.5 * dw + 0.5 * math.sqrt(h) * stream.next()
        pending.append((0.5 * h, dw - first))
        pending.append((0.5 * h, first))
    return x, dt_eff, rejections


def step_radial(
    R: RootSystem,
    k: Multiplicities,
    x: VectorLike,
    dt: float,
    gaussian_increment: VectorLike,
    cfg: Optional[StepperConfig] = None,
) -> np.ndarray:
    """One Euler-Maruyama step ``x + b(x) dt_eff + sqrt(dt_eff) g`` that stays in the chamber.

    ``dt_eff`` is ``min(dt, wall_safety * d^2)``, halved on each rejected
    proposal with the same increment ``g``.

    Raises:
        ValueError: If ``x`` is not in the open chamber.
        RuntimeError: If more than ``max_rejections`` proposals are rejected.

    """
    cfg = cfg or StepperConfig(dt_max=dt)
    coeffs = coefficients(R, k)
    x = _require_in_chamber(coeffs, x, "x")
    g = as_vector(gaussian_increment, "gaussian_increment", R.rank)
    proposal, _, _ = _euler_step(coeffs, x, min(dt, cfg.dt_max), g, cfg)
    return proposal


def _require_in_chamber(coeffs: HoCoefficients, x: VectorLike, name: str) -> np.ndarray:
    x = as_vector(x, name, coeffs.R.rank)
    if not np.all(coeffs.margins(x) > 0):
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"{name} = {x.tolist()} is not in the open positive chamber",
        )
    return x


@dataclass
class _Leg:
    times: List[float]
    positions: List[np.ndarray]
    end: np.ndarray
    wall_min: float
    steps: int
    rejections: int


def _run_radial(
    coeffs: HoCoefficients,
    x: np.ndarray,
    cfg: StepperConfig,
    t_start: float,
    t_end: float,
    stream: KeyedStream,
    record: bool = True,
) -> _Leg:
    """Advance from ``t_start`` to ``t_end`` exactly, recording every ``record_stride``-th step."""
    times, positions = [t_start], [x]
    wall_min = float(np.min(np.abs(coeffs.margins(x))))
    t, steps, rejections = t_start, 0, 0
    while t_end - t > 1e-12 * max(1.0, t_end):
        x, dt_eff, rejected = _euler_step(
            coeffs, x, min(cfg.dt_max, t_end - t), stream.next(), cfg, stream
        )
        t += dt_eff
        steps += 1
        rejections += rejected
        wall_min = min(wall_min, float(np.min(np.abs(coeffs.margins(x)))))
        if record and steps % cfg.record_stride == 0:
            times.append(t)
            positions.append(x)
    if times[-1] != t:
        times.append(t)
        positions.append(x)
    return _Leg(times, positions, x, wall_min, steps, rejections)


def _as_record(leg: _Leg, trajectory_id: int) -> TrajectoryRecord:
    return TrajectoryRecord(
        times=np.asarray(leg.times),
        positions=np.vstack(leg.positions),
        terminal=leg.end,
        wall_min=leg.wall_min,
        trajectory_id=trajectory_id,
        steps=leg.steps,
        rejections=leg.rejections,
    )


def simulate_radial(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    trajectory_id: int = 0,
) -> TrajectoryRecord:
    """Radial path on ``[0, cfg.t_horizon]`` driven by the keyed normals of ``trajectory_id``.

    With ``record_path`` off only the start and terminal points are stored.

    Raises:
        ValueError: If ``x0`` is not in the open chamber.
        RuntimeError: On wall contact.

    """
    coeffs = coefficients(R, k)
    x = _require_in_chamber(coeffs, x0, "x0")
    stream = KeyedStream(cfg.seed, NORMALS, trajectory_id, R.rank)
    leg = _run_radial(coeffs, x, cfg, 0.0, cfg.t_horizon, stream, record=cfg.record_path)
    return _as_record(leg, trajectory_id)


def simulate_radial_checkpoints(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    checkpoints: Sequence[float],
    trajectory_id: int = 0,
) -> np.ndarray:
    """Positions at increasing ``checkpoints`` of one radial path, without storing it.

    The path is advanced leg by leg so every checkpoint is hit exactly.
    """
    coeffs = coefficients(R, k)
    x = _require_in_chamber(coeffs, x0, "x0")
    stream = KeyedStream(cfg.seed, NORMALS, trajectory_id, R.rank)
    rows, t = [], 0.0
    for checkpoint in checkpoints:
        if checkpoint < t:
            log_and_raise_error(
                logger, "error", ValueError, f"checkpoints must increase, got {list(checkpoints)}"
            )
        x = _run_radial(coeffs, x, cfg, t, checkpoint, stream, record=False).end
        t = checkpoint
        rows.append(x)
    return np.vstack(rows)


# ---ENSEMBLES---
def _radial_worker(task) -> TrajectoryRecord:
    R, k, x0, cfg, trajectory_id = task
    return simulate_radial(R, k, x0, cfg, trajectory_id)


def _checkpoint_worker(task) -> np.ndarray:
    R, k, x0, cfg, checkpoints, trajectory_id = task
    return simulate_radial_checkpoints(R, k, x0, cfg, checkpoints, trajectory_id)


@ensemble_cache()
@log_decorator(logger, level="info", suffix_message="Simulate radial ensemble")
def simulate_radial_ensemble(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    n: int,
    trajectory_offset: int = 0,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> List[TrajectoryRecord]:
    """``n`` independent radial paths with trajectory ids ``offset .. offset + n - 1``."""
    tasks = [(R, k, x0, cfg, trajectory_offset + i) for i in range(n)]
    return ordered_map(_radial_worker, tasks, threads=threads)


@ensemble_cache()
@log_decorator(logger, level="info", suffix_message="Simulate radial checkpoints")
def radial_checkpoint_ensemble(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    cfg: StepperConfig,
    checkpoints: Sequence[float],
    n: int,
    trajectory_offset: int = 0,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> np.ndarray:
    """Array of shape ``(n, len(checkpoints), rank)`` of checkpoint positions."""
    tasks = [(R, k, x0, cfg, tuple(checkpoints), trajectory_offset + i) for i in range(n)]
    return np.stack(ordered_map(_checkpoint_worker, tasks, threads=threads))


def terminal_points(records: Sequence[TrajectoryRecord]) -> np.ndarray:
    """Terminal positions as an ``(n, rank)`` array."""
    return np.vstack([record.terminal for record in records])


# ---MIRROR COUPLING---
def _mirror(u: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``(I - 2 u u^T / |u|^2) g``."""
    return g - 2.0 * (u @ g) / (u @ u) * u


def _mirror_step(
    coeffs: HoCoefficients,
    x: np.ndarray,
    y: np.ndarray,
    dt: float,
    g: np.ndarray,
    cfg: StepperConfig,
    stream: KeyedStream,
) -> Tuple[np.ndarray, np.ndarray, float, int, np.ndarray]:
    """One synchronous step of an uncoupled pair; also returns ``b(y) - b(x)``.

    A rejected proposal is retried on half the step with a fresh draw, so the
    accepted increment is biased away from the walls on those steps. The cap
    ``wall_safety * d^2`` keeps them rare and the pair coupling check needs
    one increment per step.
    """
    u = y - x
    dt_eff = min(
        dt,
        cfg.wall_safety * coeffs.wall_distance(x) ** 2,
        cfg.wall_safety * coeffs.wall_distance(y) ** 2,
    )
    bx, by = coeffs.drift(x), coeffs.drift(y)
    for attempt in range(cfg.max_rejections + 1):
        scale = cfg.noise_scale * math.sqrt(dt_eff)
        x_new = x + bx * dt_eff + scale * g
        y_new = y + by * dt_eff + scale * _mirror(u, g)
        if np.all(coeffs.margins(x_new) > 0) and np.all(coeffs.margins(y_new) > 0):
            return x_new, y_new, dt_eff, attempt, by - bx
        dt_eff *= 0.5
        g = stream.next()
    _wall_contact(x, dt_eff, cfg.max_rejections + 1)


def mirror_couple(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    y0: VectorLike,
    cfg: StepperConfig,
    trajectory_id: int = 0,
) -> CouplingRecord:
    """Mirror-coupled radial pair: Y is driven by X's increment reflected across the bisecting hyperplane.

    Both members advance on a shared grid with the smaller of their adaptive
    steps. The pair is declared coupled when ``|Y - X| <= couple_tolerance``
    or when ``Y - X`` crosses the bisecting hyperplane within a step; Y is
    then snapped to X and follows it, to the horizon when ``run_to_horizon``
    is set, otherwise the record stops at the coupling time.

    Raises:
        ValueError: If a start point is not in the open chamber.
        RuntimeError: On wall contact.

    """
    coeffs = coefficients(R, k)
    x = _require_in_chamber(coeffs, x0, "x0")
    y = _require_in_chamber(coeffs, y0, "y0")
    stream = KeyedStream(cfg.seed, NORMALS, trajectory_id, R.rank)

    z = float(np.linalg.norm(y - x))
    coupling_time: Optional[float] = None
    if z <= cfg.couple_tolerance:
        coupling_time, y, z = 0.0, x.copy(), 0.0
    times, xs, ys, zs = [0.0], [x], [y], [z]
    wall_x = float(np.min(coeffs.margins(x)))
    wall_y = float(np.min(coeffs.margins(y)))
    t, horizon = 0.0, cfg.t_horizon
    steps = rejections = 0
    qv, gap, gap_sup = 0.0, np.zeros(R.rank), 0.0

    while horizon - t > 1e-12 * max(1.0, horizon):
        if coupling_time is not None and not cfg.run_to_horizon:
            break
        step_max = min(cfg.dt_max, horizon - t)
        just_coupled = False
        if coupling_time is not None:
            x, dt_eff, rejected = _euler_step(coeffs, x, step_max, stream.next(), cfg, stream)
            y = x
        else:
            x_new, y_new, dt_eff, rejected, drift_gap = _mirror_step(
                coeffs, x, y, step_max, stream.next(), cfg, stream
            )
            gap += drift_gap * dt_eff
            gap_sup = max(gap_sup, float(np.linalg.norm(gap)))
            u_old, u_new = y - x, y_new - x_new
            z_new = float(np.linalg.norm(u_new))
            x, y = x_new, y_new
            if z_new <= cfg.couple_tolerance or float(u_old @ u_new) <= 0.0:
                just_coupled = True
                coupling_time = t + dt_eff
                y, z_new = x.copy(), 0.0
            qv += (z_new - z) ** 2
            z = z_new
        t += dt_eff
        steps += 1
        rejections += rejected
        wall_x = min(wall_x, float(np.min(coeffs.margins(x))))
        wall_y = min(wall_y, float(np.min(coeffs.margins(y))))
        if just_coupled or steps % cfg.record_stride == 0:
            times.append(t)
            xs.append(x)
            ys.append(y)
            zs.append(z)
    if times[-1] != t:
        times.append(t)
        xs.append(x)
        ys.append(y)
        zs.append(z)

    window = coupling_time if coupling_time is not None else t
    qv_rate = None
    if window > 0 and cfg.noise_scale > 0:
        qv_rate = qv / (4.0 * cfg.noise_scale**2 * window)

    def _path(points: List[np.ndarray], wall: float) -> TrajectoryRecord:
        return TrajectoryRecord(
            times=np.asarray(times),
            positions=np.vstack(points),
            terminal=points[-1],
            wall_min=wall,
            trajectory_id=trajectory_id,
            steps=steps,
            rejections=rejections,
        )

    if coupling_time is None:
        logger.debug(
            f" | Function | mirror_couple() | Check | trajectory {trajectory_id} | not coupled by {t:g} | z = {z:.3e}"
        )
    return CouplingRecord(
        x_path=_path(xs, wall_x),
        y_path=_path(ys, wall_y),
        z_times=np.asarray(times),
        z=np.asarray(zs),
        coupling_time=coupling_time,
        qv=qv,
        qv_rate=qv_rate,
        drift_gap_sup=gap_sup,
        trajectory_id=trajectory_id,
    )


def _couple_worker(task) -> CouplingRecord:
    R, k, x0, y0, cfg, trajectory_id = task
    return mirror_couple(R, k, x0, y0, cfg, trajectory_id)


@ensemble_cache()
@log_decorator(logger, level="info", suffix_message="Simulate coupled pairs")
def couple_ensemble(
    R: RootSystem,
    k: Multiplicities,
    x0: VectorLike,
    y0: VectorLike,
    cfg: StepperConfig,
    n: int,
    trajectory_offset: int = 0,
    threads: Optional[int] = None,
    use_cache: bool = False,
) -> List[CouplingRecord]:
    """``n`` independent mirror-coupled pairs."""
    tasks = [(R, k, x0, y0, cfg, trajectory_offset + i) for i in range(n)]
    return ordered_map(_couple_worker, tasks, threads=threads)


@log_decorator(logger, suffix_message="Summarise coupling times")
def coupling_statistics(records: Sequence[CouplingRecord]) -> CouplingSummary:
    """Empirical CDF and Kaplan-Meier survival of coupling times.

    Pairs not coupled by their horizon are right-censored at it. The ECDF
    values are fractions of all pairs, so the last one is the fraction coupled.

    Raises:
        ValueError: With fewer than two records.

    """
    if len(records) < 2:
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"coupling_statistics needs at least 2 records, got {len(records)}",
        )
    n = len(records)
    coupled = sorted(r.coupling_time for r in records if r.coupled)
    censored = sorted(float(r.x_path.times[-1]) for r in records if not r.coupled)

    ecdf_times = sorted(set(coupled))
    counts = np.searchsorted(np.asarray(coupled), np.asarray(ecdf_times), side="right")
    ecdf_values = (counts / n).tolist()

    # Kaplan-Meier: at each event time, survival *= 1 - events / at_risk
    all_times = np.asarray(coupled + censored)
    km_times, km_survival, survival = [], [], 1.0
    for event_time in ecdf_times:
        events = coupled.count(event_time)
        at_risk = int(np.sum(all_times >= event_time))
        survival *= 1.0 - events / at_risk
        km_times.append(event_time)
        km_survival.append(survival)

    qv_rates = [r.qv_rate for r in records if r.coupled and r.qv_rate is not None]
    gaps = [r.drift_gap_sup for r in records]
    return CouplingSummary(
        n=n,
        n_coupled=len(coupled),
        fraction_coupled=len(coupled) / n,
        coupling_times=coupled,
        censor_times=censored,
        ecdf_times=ecdf_times,
        ecdf_values=ecdf_values,
        km_times=km_times,
        km_survival=km_survival,
        median_qv_rate=float(np.median(qv_rates)) if qv_rates else None,
        median_drift_gap=float(np.median(gaps)),
    )
