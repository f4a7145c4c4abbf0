"""The holab library simulates the stochastic processes of the Heckman-Opdam Laplacian and checks their boundary behaviour statistically.

It builds root systems and Weyl groups, evaluates the drift and jump coefficients, simulates the radial process, its mirror coupling and the full jump process (by thinning or by skew product), and runs Monte Carlo experiments on the Poisson boundary: coupling bounds, boundary functions, martingale checks of harmonicity and the rank-one basis change.

It is also equipped with a configurable logging facility, so long ensemble runs are easy to follow and debug.
"""

from ._version import __version__

# Root systems and operators
from .processors.rootsys import build_root_system, multiplicity, radial_decompose, rho
from .processors.ho_operators import ScalarField, drift, jump_rate
from .processors.hypergeometric import rank1_F, rank1_G

# Simulation and estimation
from .processors.diffusion import mirror_couple, simulate_radial
from .processors.jumps import compare_constructions, simulate_skew_product, simulate_thinning
from .processors.estimator import estimate_hw, martingale_check, theorem1_experiment
from .processors.runner import parse_config, run

# Tools
from holab.validation import validators
from .validation.validators import Rank1Params, StepperConfig
from .tools.time import LogBlock

# Change and access global logging config
from .tools.logger_interface import loggers
from .config.logger_config import (
    configure_logging,
    reset_logging,
)

# Among other things, determines the display order in the docs
__all__ = [
    "build_root_system",
    "multiplicity",
    "radial_decompose",
    "rho",
    "ScalarField",
    "drift",
    "jump_rate",
    "rank1_F",
    "rank1_G",
    "simulate_radial",
    "mirror_couple",
    "simulate_thinning",
    "simulate_skew_product",
    "compare_constructions",
    "estimate_hw",
    "martingale_check",
    "theorem1_experiment",
    "parse_config",
    "run",
    "validators",
    "Rank1Params",
    "StepperConfig",
    "LogBlock",
    "configure_logging",
    "reset_logging",
    "loggers",
    "__version__",
]
