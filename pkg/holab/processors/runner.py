"""Configuration parsing, experiment dispatch and run artefacts.

A run is described by a :class:`~holab.validation.validators.RunConfig` read
from a flat TOML file with ``[system]``, ``[experiment]`` and ``[run]``
sections. :func:`run` executes the selected experiment and writes, below
``run.out``:

* ``<experiment>_result.json``: config echo, estimates, standard errors and tests,
* ``<experiment>_<table>.csv``: per-trajectory or per-grid-point tables,
* ``manifest.json``: full config echo, code version, file list and the only
  wall clock field, ``timestamp``.

Result files never contain the thread budget or a time, so reruns of one
configuration are byte-identical.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import itertools
import os

import numpy as np
import pandas as pd
import toml
from pydantic import ValidationError

from holab._version import __version__
from holab.processors.diffusion import (
    coupling_statistics,
    simulate_radial_ensemble,
)
from holab.processors.estimator import (
    DEFAULT_BASIS_GRID,
    basis_change_rank1,
    coupling_check,
    estimate_hw,
    hw_equivariance,
    lln_check,
    lln_drift_only,
    lln_variance_ratio,
    martingale_check,
    no_jump_probability,
    theorem1_experiment,
)
from holab.processors.ho_operators import ScalarField, apply_laplacian_fd, constant_field
from holab.processors.hypergeometric import oracle_field, rank1_components
from holab.processors.jumps import (
    compare_constructions,
    full_ensemble,
    jump_window_counts,
    trajectory_frame,
)
from holab.processors.rootsys import (
    MultiplicityFunction,
    RootSystem,
    build_root_system,
    multiplicity,
    rho,
    root_system_info,
)
from holab.tools.file_exporters import SCHEMA_VERSION, write_csv, write_json
from holab.tools.logging_ import RunnerLogger, log_decorator, log_and_raise_error
from holab.tools.time import LogBlock
from holab.validation.validators import (
    CheckOutcome,
    ExperimentReport,
    Rank1Params,
    RunConfig,
    StepperConfig,
)

logger = RunnerLogger().setup()

RESULT_SUFFIX = "_result.json"
MANIFEST_NAME = "manifest.json"
DEFAULT_ORACLE_GRID = np.linspace(-5.0, 5.0, 101)
# Fields that must not change the numerical output
_EXECUTION_ONLY = {"run": {"threads", "use_cache", "out"}}


@dataclass
class ExperimentOutcome:
    """Report plus named tables, each written to ``<experiment>_<name>.csv``."""

    report: ExperimentReport
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)


# ---CONFIG TEXT---
def _locate(text: str, loc: Sequence[Any]) -> Optional[int]:
    """1-based line of the section header or key named by a pydantic error location."""
    section = str(loc[0]) if loc else None
    key = str(loc[1]) if len(loc) > 1 else None
    current = None
    header_line = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line.startswith("[") and line.endswith("]"):
            current = line.strip("[]").strip()
            if current == section and header_line is None:
                header_line = number
            if key is not None and current == f"{section}.{key}":
                return number
            continue
        if current == section and key is not None and "=" in line:
            if line.split("=", 1)[0].strip().strip('"') == key:
                return number
    return header_line


def _describe(error: Dict[str, Any]) -> str:
    loc = error.get("loc", ())
    section = loc[0] if loc else "?"
    key = loc[1] if len(loc) > 1 else None
    if error.get("type") == "extra_forbidden":
        if key is None:
            return f"unknown section [{section}]"
        return f"unknown key '{key}' in [{section}]"
    message = error.get("msg", "invalid value").replace("Assertion failed, ", "")
    where = f"'{key}' in [{section}]" if key is not None else f"[{section}]"
    return f"{message} ({where})"


@log_decorator(logger, suffix_message="Parse run configuration")
def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration.

    Only the first error is reported, prefixed with its line number.

    Raises:
        ValueError: On malformed text, unknown keys, type mismatches or k < 1/2.

    """
    try:
        document = toml.loads(text)
    except toml.TomlDecodeError as error:
        log_and_raise_error(logger, "error", ValueError, f"line {error.lineno}: {error.msg}")
    try:
        return RunConfig.model_validate(document)
    except ValidationError as error:
        first = error.errors()[0]
        line = _locate(text, first.get("loc", ()))
        prefix = f"line {line}: " if line is not None else ""
        log_and_raise_error(logger, "error", ValueError, prefix + _describe(first))


def config_document(config: RunConfig, execution: bool = True) -> Dict[str, Any]:
    """Every field with defaults filled, by alias. ``execution=False`` drops output-neutral fields."""
    document = config.model_dump(mode="json", by_alias=True)
    if not execution:
        for section, keys in _EXECUTION_ONLY.items():
            for key in keys:
                document[section].pop(key, None)
    return document


def dump_config(config: RunConfig) -> str:
    """TOML text that :func:`parse_config` reads back to an equal config."""
    document = config.model_dump(mode="json", by_alias=True, exclude_none=True)
    return toml.dumps(document)


@log_decorator(logger, suffix_message="Apply command line overrides")
def apply_overrides(config: RunConfig, overrides: Dict[str, Dict[str, Any]]) -> RunConfig:
    """Replace section values with the given ones (``None`` values are ignored).

    Raises:
        ValueError: If the result does not validate.

    """
    document = config.model_dump(mode="json", by_alias=True, exclude_none=True)
    for section, values in overrides.items():
        for key, value in values.items():
            if value is not None:
                document.setdefault(section, {})[key] = value
    try:
        return RunConfig.model_validate(document)
    except ValidationError as error:
        log_and_raise_error(logger, "error", ValueError, _describe(error.errors()[0]))


# ---SYSTEM AND DEFAULTS---
def build_system(config: RunConfig) -> Tuple[RootSystem, MultiplicityFunction]:
    """Root system and multiplicity function of the ``[system]`` section."""
    system = config.system
    R = build_root_system(system.family, system.rank, system.normalization, weyl_cap=system.weyl_cap)
    return R, multiplicity(R, system.k)


def stepper_config(config: RunConfig) -> StepperConfig:
    experiment = config.experiment
    return StepperConfig(
        dt_max=experiment.dt,
        t_horizon=experiment.horizon,
        wall_safety=experiment.wall_safety,
        couple_tolerance=experiment.couple_tolerance,
        seed=config.run.seed,
    )


def rank1_params(R: RootSystem, k: MultiplicityFunction) -> Rank1Params:
    if R.family != "rank1":
        log_and_raise_error(
            logger, "error", ValueError, f"experiment needs the rank1 system, got {R.family}{R.rank}"
        )
    return Rank1Params(alpha=float(R.positive_roots[0, 0]), k=k.values[0])


def default_points(R: RootSystem, k: MultiplicityFunction) -> Tuple[np.ndarray, np.ndarray]:
    """Rank one: 1 and 3. Otherwise the unit vector along rho and three times it."""
    if R.family == "rank1":
        return np.array([1.0]), np.array([3.0])
    direction = rho(R, k)
    x0 = direction / np.linalg.norm(direction)
    return x0, 3.0 * x0


def start_points(config: RunConfig, R: RootSystem, k: MultiplicityFunction) -> Tuple[np.ndarray, np.ndarray]:
    x0, y0 = default_points(R, k)
    if config.experiment.x0 is not None:
        x0 = np.asarray(config.experiment.x0, dtype=float)
    if config.experiment.y0 is not None:
        y0 = np.asarray(config.experiment.y0, dtype=float)
    return x0, y0


def _merge(name: str, reports: Sequence[ExperimentReport]) -> ExperimentReport:
    """One report whose sections are keyed by the constituent experiment names."""
    merged = ExperimentReport(experiment=name)
    for report in reports:
        merged.estimates[report.experiment] = report.estimates
        if report.stderr:
            merged.stderr[report.experiment] = report.stderr
        merged.details[report.experiment] = report.details
        merged.checks.extend(report.checks)
    return merged


def _terminal_table(R: RootSystem, ids: Sequence[int], points: np.ndarray) -> pd.DataFrame:
    frame = pd.DataFrame({"trajectory_id": list(ids)})
    for i in range(R.rank):
        frame[f"x{i + 1}"] = points[:, i]
    return frame


# ---EXPERIMENTS---
def _rootsys_info(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    info = root_system_info(R, k)
    report = ExperimentReport(
        experiment="rootsys_info",
        estimates=info,
        checks=[CheckOutcome(name="rho_regular", passed=info["rho_regular"])],
    )
    roots = pd.DataFrame(R.roots, columns=[f"x{i + 1}" for i in range(R.rank)])
    roots.insert(0, "index", range(len(R.roots)))
    roots["positive"] = [i < R.n_positive for i in range(len(R.roots))]
    return ExperimentOutcome(report, {"roots": roots})


def _oracle_eval(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    p = rank1_params(R, k)
    lam = p.rho if config.experiment.lam is None else config.experiment.lam
    grid = DEFAULT_ORACLE_GRID if config.experiment.grid is None else np.asarray(config.experiment.grid)
    table = rank1_components(p, lam, grid)
    even_gap = float(np.max(np.abs(table["E"] - table["F"])))
    at_origin = rank1_components(p, lam, [0.0])
    origin_gap = float(abs(at_origin["G"][0] - 1.0) + abs(at_origin["F"][0] - 1.0))
    report = ExperimentReport(
        experiment="oracle_eval",
        estimates={"lambda": lam, "rho": p.rho, "points": len(table)},
        checks=[
            CheckOutcome(name="even_part_equals_F", statistic=even_gap, threshold=1e-8, passed=even_gap <= 1e-8),
            CheckOutcome(name="normalised_at_origin", statistic=origin_gap, threshold=1e-10, passed=origin_gap <= 1e-10),
        ],
        details={"alpha": p.alpha, "k": p.k},
    )
    return ExperimentOutcome(report, {"oracle": table})


def _simulate_radial(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    x0, _ = start_points(config, R, k)
    cfg = stepper_config(config).model_copy(update={"record_path": False})
    records = simulate_radial_ensemble(
        R, k, x0, cfg, config.experiment.paths, threads=config.run.threads, use_cache=config.run.use_cache
    )
    terminal = np.vstack([r.terminal for r in records])
    table = _terminal_table(R, [r.trajectory_id for r in records], terminal)
    table["wall_min"] = [r.wall_min for r in records]
    table["steps"] = [r.steps for r in records]
    table["rejections"] = [r.rejections for r in records]
    wall_min = float(table["wall_min"].min())
    report = ExperimentReport(
        experiment="simulate_radial",
        estimates={
            "mean_terminal": terminal.mean(axis=0).tolist(),
            "min_wall_margin": wall_min,
            "rejections": int(table["rejections"].sum()),
        },
        checks=[CheckOutcome(name="wall_avoidance", statistic=wall_min, threshold=0.0, passed=wall_min > 0)],
        details={"paths": len(records), "x0": x0.tolist()},
    )
    return ExperimentOutcome(report, {"terminal": table})


def _jump_windows(horizon: float) -> List[Tuple[float, float]]:
    """First and last sixth of the horizon, [0, 10) and [50, 60) at T = 60."""
    width = horizon / 6.0
    return [(0.0, width), (horizon - width, horizon)]


def _simulate_full(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    x0, _ = start_points(config, R, k)
    experiment = config.experiment
    cfg = stepper_config(config)
    sample = full_ensemble(
        R, k, x0, cfg.model_copy(update={"record_path": False}), experiment.paths,
        experiment.method, experiment.order, threads=config.run.threads, use_cache=config.run.use_cache,
    )
    table = _terminal_table(R, [t.base.trajectory_id for t in sample], np.vstack([t.terminal for t in sample]))
    table["final_angular"] = [t.final_angular.label if t.final_angular is not None else "undetermined" for t in sample]
    table["jump_count"] = [t.jump_count for t in sample]
    table["residual_intensity"] = [t.residual_intensity for t in sample]
    windows = jump_window_counts(sample, _jump_windows(experiment.horizon))
    early, late = windows["mean_jumps"].iloc[0], windows["mean_jumps"].iloc[-1]
    ratio = float(late / early) if early > 0 else 0.0

    # Full path of trajectory 0 for inspection
    first = full_ensemble(R, k, x0, cfg, 1, experiment.method, experiment.order, use_cache=False)[0]
    report = ExperimentReport(
        experiment="simulate_full",
        estimates={
            "mean_jumps": float(table["jump_count"].mean()),
            "late_to_early_jump_ratio": ratio,
            "final_angular_counts": table["final_angular"].value_counts().sort_index().to_dict(),
        },
        checks=[CheckOutcome(name="jump_cessation", statistic=ratio, threshold=0.01, passed=ratio < 0.01)],
        details={"paths": experiment.paths, "method": experiment.method, "order": experiment.order},
    )
    return ExperimentOutcome(
        report, {"terminal": table, "jump_windows": windows, "trajectory0": trajectory_frame(R, first)}
    )


def _couple(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    x0, y0 = start_points(config, R, k)
    report, pairs = coupling_check(
        R, k, x0, y0, stepper_config(config), config.experiment.paths,
        min_coupled_fraction=config.experiment.min_coupled_fraction,
        threads=config.run.threads, use_cache=config.run.use_cache,
    )
    summary = coupling_statistics(pairs)
    pairs_table = pd.DataFrame(
        {
            "trajectory_id": [p.trajectory_id for p in pairs],
            "coupled": [p.coupled for p in pairs],
            "coupling_time": [p.coupling_time if p.coupled else np.nan for p in pairs],
            "qv_rate": [p.qv_rate if p.qv_rate is not None else np.nan for p in pairs],
            "drift_gap_sup": [p.drift_gap_sup for p in pairs],
        }
    )
    survival = pd.DataFrame({"t": summary.km_times, "survival": summary.km_survival})
    return ExperimentOutcome(report, {"pairs": pairs_table, "survival": survival})


def _equivalence(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    x0, _ = start_points(config, R, k)
    experiment = config.experiment
    cfg = stepper_config(config)
    shared = dict(threads=config.run.threads, use_cache=config.run.use_cache)
    main = compare_constructions(
        R, k, x0, cfg, experiment.paths, "thinning", "skew", root_order_b=experiment.order, **shared
    )
    null = compare_constructions(
        R, k, x0, cfg, experiment.paths, "thinning", "thinning",
        trajectory_offset=2 * experiment.paths, **shared,
    )
    power = compare_constructions(
        R, k, x0, cfg, experiment.paths, "thinning", "skew", rate_scale_b=2.0,
        root_order_b=experiment.order, trajectory_offset=4 * experiment.paths, **shared,
    )
    reversed_order = tuple(reversed(experiment.order or range(R.n_positive)))
    orders = compare_constructions(
        R, k, x0, cfg, experiment.paths, "skew", "skew", root_order_a=experiment.order,
        root_order_b=reversed_order, trajectory_offset=6 * experiment.paths, **shared,
    )
    report = ExperimentReport(
        experiment="equivalence",
        estimates={
            "thinning_vs_skew": main.estimates,
            "split_sample": null.estimates,
            "doubled_rates": power.estimates,
            "root_order": orders.estimates,
        },
        checks=main.checks
        + [
            CheckOutcome(name="split_sample_null", passed=null.passed),
            CheckOutcome(name="doubled_rate_detected", passed=not power.passed),
            CheckOutcome(name="root_order_invariance", passed=orders.passed),
        ],
        details={
            "thinning_vs_skew": main.details,
            "split_sample": {**null.details, "failures": null.failures()},
            "doubled_rates": {**power.details, "failures": power.failures()},
            "root_order": {**orders.details, "failures": orders.failures(), "order_b": list(reversed_order)},
        },
    )
    return ExperimentOutcome(report)


def _hw_table_rows(table, start_label: str) -> List[Dict[str, Any]]:
    return [
        {
            "start": start_label,
            "w": label,
            "value": estimate.value,
            "stderr": estimate.stderr,
            "count": table.counts[label],
            "n_determined": table.n_determined,
            "excluded": table.excluded,
        }
        for label, estimate in table.per_w.items()
    ]


def _hw(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    experiment = config.experiment
    cfg = stepper_config(config)
    shared = dict(threads=config.run.threads, use_cache=config.run.use_cache)
    reports, rows, sums = [], [], []
    # every table draws its own trajectory ids
    offsets = itertools.count(0, experiment.paths)

    def table_at(x, method=experiment.method, order=None):
        table = estimate_hw(
            R, k, x, cfg, experiment.paths, method, order, trajectory_offset=next(offsets), **shared
        )
        label = ",".join(f"{c:g}" for c in np.atleast_1d(x))
        rows.extend(_hw_table_rows(table, f"{label}|{method}"))
        sums.append(table.total())
        return table

    if R.family == "rank1":
        reflection = R.weyl_group[1]
        grid = experiment.grid or list(DEFAULT_BASIS_GRID)
        for x in sorted({abs(v) for v in grid}):
            report = hw_equivariance(R, table_at([x]), table_at([-x]), reflection, prefix=f"equivariance_x{x:g}")
            reports.append(report.model_copy(update={"experiment": f"equivariance_x{x:g}"}))
        far = table_at([5.0])
        identity = R.identity.label
        reports.append(
            ExperimentReport(
                experiment="far_start",
                estimates={"h_id": far.value(identity)},
                stderr={"h_id": far.per_w[identity].stderr},
                checks=[
                    CheckOutcome(
                        name="h_id_at_5", statistic=far.value(identity), threshold=0.99,
                        passed=far.value(identity) >= 0.99,
                    )
                ],
            )
        )
    else:
        x0, _ = start_points(config, R, k)
        base = table_at(x0, "thinning")
        skew = table_at(x0, "skew", experiment.order)
        reversed_order = tuple(reversed(experiment.order or range(R.n_positive)))
        skew_reversed = table_at(x0, "skew", reversed_order)
        identity = R.identity
        for name, other in (("method", skew), ("root_order", skew_reversed)):
            report = hw_equivariance(R, base, other, identity, prefix=f"{name}_invariance")
            reports.append(report.model_copy(update={"experiment": f"{name}_invariance"}))
        v = R.weyl_group[1]
        report = hw_equivariance(R, base, table_at(v.act(x0), "thinning"), v)
        reports.append(report)

    merged = _merge("hw", reports)
    gap = float(max(abs(s - 1.0) for s in sums))
    merged.checks.append(CheckOutcome(name="rows_sum_to_one", statistic=gap, threshold=1e-12, passed=gap <= 1e-12))
    return ExperimentOutcome(merged, {"table": pd.DataFrame(rows)})


def _martingale(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    experiment = config.experiment
    x0, _ = start_points(config, R, k)
    cfg = stepper_config(config)
    shared = dict(threads=config.run.threads, use_cache=config.run.use_cache)

    fields: List[ScalarField] = [constant_field(1.0)]
    residual_check = None
    if R.family == "rank1":
        p = rank1_params(R, k)
        g_rho = oracle_field(p, p.rho, "G")
        fields += [g_rho, oracle_field(p, -p.rho, "G")]
        points = np.linspace(0.5, 5.0, 10)
        residual = max(abs(apply_laplacian_fd(R, k, g_rho, [x])) for x in points)
        residual_check = CheckOutcome(
            name="laplacian_residual_G_rho", statistic=float(residual), threshold=1e-4, passed=residual < 1e-4
        )
    direction = rho(R, k)
    control = ScalarField(lambda x: float(np.dot(direction, x)), name="rho_projection")

    reports = []
    for t in experiment.t_values:
        for f in fields:
            reports.append(
                martingale_check(f, R, k, x0, t, cfg, experiment.paths, experiment.method, **shared)
                .model_copy(update={"experiment": f"{f.name}_t{t:g}"})
            )
    control_report = martingale_check(control, R, k, x0, experiment.t_values[0], cfg, experiment.paths, experiment.method, **shared)
    merged = _merge("martingale", reports)
    merged.estimates["control"] = control_report.estimates
    merged.checks.append(
        CheckOutcome(
            name="non_harmonic_control_detected",
            statistic=control_report.estimates["z"],
            threshold=3.0,
            passed=not control_report.passed,
        )
    )
    if residual_check is not None:
        merged.checks.append(residual_check)
    return ExperimentOutcome(merged)


def _theorem1(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    x0, y0 = start_points(config, R, k)
    report = theorem1_experiment(
        R, k, x0, y0, stepper_config(config), config.experiment.paths,
        threads=config.run.threads, use_cache=config.run.use_cache,
    )
    table = pd.DataFrame(
        {"t": report.details["checkpoints"], "bound": report.details["bounds"]}
    )
    return ExperimentOutcome(report, {"bounds": table})


def _basis(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    p = rank1_params(R, k)
    experiment = config.experiment
    report = basis_change_rank1(
        p, experiment.grid or DEFAULT_BASIS_GRID, stepper_config(config), experiment.paths,
        experiment.method, threads=config.run.threads, use_cache=config.run.use_cache,
    )
    estimates, details = report.estimates, report.details
    table = pd.DataFrame(
        {
            "x": details["grid"],
            "h_id": estimates["h_id"],
            "h_s": estimates["h_s"],
            "h_stderr": report.stderr["h"],
            "G_rho": details["g_rho"],
            "G_minus_rho": details["g_minus_rho"],
            "residual_G_rho": details["residuals"][0],
            "residual_G_minus_rho": details["residuals"][1],
        }
    )
    return ExperimentOutcome(report, {"grid": table})


def _lln(config: RunConfig) -> ExperimentOutcome:
    R, k = build_system(config)
    x0, _ = start_points(config, R, k)
    experiment = config.experiment
    cfg = stepper_config(config)
    shared = dict(threads=config.run.threads, use_cache=config.run.use_cache)
    reports = [
        lln_check(R, k, x0, cfg, experiment.paths, experiment.burn_in, **shared),
        lln_variance_ratio(R, k, x0, cfg, experiment.paths, **shared),
        lln_drift_only(R, k, x0, cfg),
    ]
    never_jump = no_jump_probability(R, k, x0, cfg, min(experiment.paths, 200), threads=config.run.threads)
    merged = _merge("lln", reports)
    merged.estimates[never_jump.experiment] = never_jump.estimates
    merged.stderr[never_jump.experiment] = never_jump.stderr
    return ExperimentOutcome(merged)


EXPERIMENT_RUNNERS: Dict[str, Callable[[RunConfig], ExperimentOutcome]] = {
    "rootsys_info": _rootsys_info,
    "oracle_eval": _oracle_eval,
    "simulate_radial": _simulate_radial,
    "simulate_full": _simulate_full,
    "couple": _couple,
    "equivalence": _equivalence,
    "hw": _hw,
    "martingale": _martingale,
    "theorem1": _theorem1,
    "basis": _basis,
    "lln": _lln,
}


def run_experiment(config: RunConfig) -> ExperimentOutcome:
    """Execute the configured experiment without writing anything."""
    return EXPERIMENT_RUNNERS[config.experiment.name](config)


# ---ARTEFACTS---
def result_document(config: RunConfig, report: ExperimentReport) -> Dict[str, Any]:
    """The schema-versioned result JSON: ``{config, estimates, stderr, tests, details}``."""
    payload = report.model_dump(mode="json", by_alias=True)
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment": report.experiment,
        "config": config_document(config, execution=False),
        "estimates": payload["estimates"],
        "stderr": payload["stderr"],
        "tests": payload["tests"],
        "details": payload["details"],
        "passed": report.passed,
        "failures": report.failures(),
    }


@log_decorator(logger, level="info", suffix_message="Run experiment")
def run(config: RunConfig, out: Optional[str] = None) -> int:
    """Run the configured experiment and write its artefacts.

    Returns:
        int: 0 if every check of the experiment passed, else 1.

    """
    name = config.experiment.name
    out = out or config.run.out
    with LogBlock(f"{name} {config.system.family}{config.system.rank}", logger) as block:
        outcome = run_experiment(config)

    files = [write_json(result_document(config, outcome.report), os.path.join(out, name + RESULT_SUFFIX))]
    for table_name, table in outcome.tables.items():
        files.append(write_csv(table, os.path.join(out, f"{name}_{table_name}.csv")))
    status = 0 if outcome.report.passed else 1
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "experiment": name,
        "config": config_document(config),
        "code_version": __version__,
        "files": [os.path.basename(path) for path in files],
        "exit_status": status,
        "failures": outcome.report.failures(),
        "timestamp": {"started_at": block.started_at, "elapsed_seconds": block.elapsed_seconds},
    }
    write_json(manifest, os.path.join(out, MANIFEST_NAME))
    if status:
        logger.warning(
            f" | Function | run() | Check | {name} failed | {', '.join(outcome.report.failures())}"
        )
    else:
        logger.info(f" | Function | run() | Check | {name} passed all {len(outcome.report.checks)} checks")
    return status
