"""Command line front end.

Usage::

    holab rootsys info --system B2 --k 1
    holab oracle eval --lambda 1 --k 1 --alpha 2 --grid=-5:5:101
    holab simulate radial --system rank1 --x0 1 --paths 1000
    holab simulate full --method skew --order 0,1,2,3 --system B2
    holab couple | equivalence | hw | martingale | theorem1 | basis | lln [flags]

Every command accepts ``--config run.toml``; flags override the file. The
exit status is 0 when every check of the experiment passed, 1 when one failed
and 2 when the configuration or a computation was rejected.
"""

from typing import Any, Dict, List, Optional, Sequence, Union
import argparse
import json
import re
import sys

from holab._version import __version__
from holab.processors.hypergeometric import parse_grid
from holab.processors.rootsys import root_system_info
from holab.processors.runner import apply_overrides, build_system, parse_config, run
from holab.tools.logging_ import CliLogger, log_and_raise_error
from holab.tools.parallel import default_thread_budget
from holab.validation.validators import RunConfig

logger = CliLogger().setup()

# (command, subcommand) -> experiment
COMMANDS = {
    ("rootsys", "info"): "rootsys_info",
    ("oracle", "eval"): "oracle_eval",
    ("simulate", "radial"): "simulate_radial",
    ("simulate", "full"): "simulate_full",
    ("couple", None): "couple",
    ("equivalence", None): "equivalence",
    ("hw", None): "hw",
    ("martingale", None): "martingale",
    ("theorem1", None): "theorem1",
    ("basis", None): "basis",
    ("lln", None): "lln",
}
_SYSTEM_PATTERN = re.compile(r"^(rank1|BC|A|B|C|D)(\d*)$")


def _floats(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        log_and_raise_error(logger, "error", ValueError, f"'{text}' is not a comma separated list of numbers")


def _ints(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        log_and_raise_error(logger, "error", ValueError, f"'{text}' is not a comma separated list of integers")


def parse_system(text: str) -> Dict[str, Any]:
    """``"B2"`` to ``{"family": "B", "rank": 2}``; ``"rank1"`` needs no rank."""
    match = _SYSTEM_PATTERN.match(text.strip())
    if match is None or (match.group(1) != "rank1" and not match.group(2)):
        log_and_raise_error(
            logger, "error", ValueError, f"system '{text}' must look like rank1, A2, B2, C3, D4 or BC2"
        )
    family = match.group(1)
    return {"family": family, "rank": 1 if family == "rank1" else int(match.group(2))}


def _multiplicity(text: str) -> Union[float, List[float]]:
    values = _floats(text)
    return values[0] if len(values) == 1 else values


def _grid(text: str) -> List[float]:
    if ":" in text:
        return parse_grid(text).tolist()
    return _floats(text)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="run configuration file (flags override it)")
    parser.add_argument("--system", help="root system, e.g. rank1, A2, B2, BC2")
    parser.add_argument("--k", help="multiplicity: one value or one per orbit, comma separated")
    parser.add_argument("--alpha", type=float, help="rank1 root length (normalization)")
    parser.add_argument("--x0", help="start point, comma separated")
    parser.add_argument("--y0", help="second start point for coupling experiments")
    parser.add_argument("--dt", type=float, help="largest time step")
    parser.add_argument("--horizon", type=float, help="simulated time")
    parser.add_argument("--paths", type=int, help="trajectories or pairs")
    parser.add_argument("--lambda", dest="lam", type=float, help="spectral parameter")
    parser.add_argument("--grid", help="a:b:n or comma separated points (write --grid=-5:5:101 for negative starts)")
    parser.add_argument("--order", help="skew-product root order, comma separated positive-root indices")
    parser.add_argument("--method", choices=("thinning", "skew"), help="full-process construction")
    parser.add_argument("--t-values", dest="t_values", help="martingale times, comma separated")
    parser.add_argument("--burn-in", dest="burn_in", type=float, help="LLN burn-in fraction")
    parser.add_argument("--seed", type=int, help="run seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker processes (default $HOLAB_THREADS or 1)")
    parser.add_argument("--use-cache", dest="use_cache", action="store_true", default=None, help="reuse cached ensembles")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holab", description="Heckman-Opdam process laboratory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    groups: Dict[str, Any] = {}
    for command, subcommand in COMMANDS:
        if subcommand is None:
            _add_common(commands.add_parser(command))
            continue
        if command not in groups:
            group = commands.add_parser(command)
            groups[command] = group.add_subparsers(dest="subcommand", required=True)
        _add_common(groups[command].add_parser(subcommand))
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    """Config section values given on the command line."""
    system: Dict[str, Any] = {}
    if args.system:
        system.update(parse_system(args.system))
    if args.k:
        system["k"] = _multiplicity(args.k)
    if args.alpha is not None:
        system["normalization"] = args.alpha
    experiment = {
        "name": COMMANDS[(args.command, getattr(args, "subcommand", None))],
        "x0": _floats(args.x0) if args.x0 else None,
        "y0": _floats(args.y0) if args.y0 else None,
        "dt": args.dt,
        "horizon": args.horizon,
        "paths": args.paths,
        "lambda": args.lam,
        "grid": _grid(args.grid) if args.grid else None,
        "order": _ints(args.order) if args.order else None,
        "method": args.method,
        "t_values": _floats(args.t_values) if args.t_values else None,
        "burn_in": args.burn_in,
    }
    run_section = {"seed": args.seed, "out": args.out, "threads": args.threads, "use_cache": args.use_cache}
    return {"system": system, "experiment": experiment, "run": run_section}


def load_config(args: argparse.Namespace) -> RunConfig:
    text = ""
    if args.config:
        with open(args.config, encoding="utf-8") as handle:
            text = handle.read()
    config = parse_config(text)
    if args.threads is None and "threads" not in config.run.model_fields_set:
        config = apply_overrides(config, {"run": {"threads": default_thread_budget()}})
    return apply_overrides(config, overrides_from_args(args))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        if config.experiment.name == "rootsys_info":
            R, k = build_system(config)
            print(json.dumps(root_system_info(R, k), indent=2, sort_keys=True))
        status = run(config)
    except (ValueError, RuntimeError, ArithmeticError, AssertionError, OSError) as error:
        print(f"holab: error: {error}", file=sys.stderr)
        return 2
    print(f"holab: {config.experiment.name} {'passed' if status == 0 else 'FAILED'} ({config.run.out})")
    return status


if __name__ == "__main__":
    sys.exit(main())
