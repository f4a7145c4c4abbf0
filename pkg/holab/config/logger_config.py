"""Provides functionality for accessing, modifying, and restoring the logger configuration contained with the `_logger_config.yaml` file.

Example:
--------
Typical usage::

    logger_config = access_logging_config()
    configure_logging(setting_type="granular", diffusion_levels=(10, 10))
    reset_logging()

"""

from typing import Optional, Tuple
import oyaml as yaml
import copy
import os

# Absolute path to store and access logger config yaml file from
_config_path = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), "_logger_config.yaml"
)

# Every component that owns a logger, in the order they appear in the yaml file
COMPONENTS: Tuple[str, ...] = (
    "rootsys",
    "ho_operators",
    "hypergeometric",
    "diffusion",
    "jumps",
    "estimator",
    "runner",
    "cli",
    "data_types",
    "validators",
    "cache",
    "rng",
    "parallel",
    "file_exporters",
    "time",
    "unhandled_errors",
)

_DEFAULT_LEVELS = {"file": 90, "console": 20}


def access_logging_config() -> dict:
    """Read the logger configuration YAML file and returns its content as a Python dictionary."""
    with open(_config_path, "r") as file:
        config = yaml.safe_load(file)
    return config


class _LoggerConfig:
    """Context manager for modifying a YAML configuration file. Opens the config, makes your changes, and then saves it."""

    def __init__(self):
        """Initialize the LoggerConfig with the path to the YAML config file."""
        self.path = _config_path

    def __enter__(self):
        """Load the YAML data from the file, store it in self.data and returns self.

        Returns:
            _LoggerConfig: The _LoggerConfig instance.

        """
        with open(self.path, "r") as f:
            self.data = yaml.safe_load(f)
            self._original_data = copy.deepcopy(self.data)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Write the modified data back to the file."""
        # Only write if changes occurred
        if self.data != self._original_data:
            with open(self.path, "w") as f:
                yaml.dump(self.data, f)


def _set_levels(d: dict, key: str, levels: Tuple[int, int]):
    """Set the logging levels for a given key in a dictionary representing an opened yaml file.

    Args:
        d (dict): The dictionary to modify.
        key (str): The component key in the dictionary to modify.
        levels (Tuple[int, int]): (file_level, console_level).

    """
    assert isinstance(d, dict), f"d is type '{type(d)}', expected dict"
    assert isinstance(key, str), f"key is type '{type(key)}', expected str"
    assert key in d, f"Key '{key}' does not exist in the logger config"
    assert isinstance(levels, tuple), f"levels is type '{type(levels)}', expected tuple"
    assert len(levels) == 2, f"levels '{levels}' must be (file_level, console_level)"
    for level in levels:
        assert isinstance(
            level, int
        ), f"value '{level}' in levels is type '{type(level)}', expected int"
    d[key]["file"] = levels[0]
    d[key]["console"] = levels[1]


def configure_logging(
    # Parent level setting directing logger level references
    setting_type: Optional[str] = None,
    # Used if setting_type == "set_all"
    set_all_levels: Optional[Tuple[int, int]] = None,
    # Used if setting_type == "granular"
    rootsys_levels: Optional[Tuple[int, int]] = None,
    ho_operators_levels: Optional[Tuple[int, int]] = None,
    hypergeometric_levels: Optional[Tuple[int, int]] = None,
    diffusion_levels: Optional[Tuple[int, int]] = None,
    jumps_levels: Optional[Tuple[int, int]] = None,
    estimator_levels: Optional[Tuple[int, int]] = None,
    runner_levels: Optional[Tuple[int, int]] = None,
    cli_levels: Optional[Tuple[int, int]] = None,
    data_types_levels: Optional[Tuple[int, int]] = None,
    validators_levels: Optional[Tuple[int, int]] = None,
    cache_levels: Optional[Tuple[int, int]] = None,
    rng_levels: Optional[Tuple[int, int]] = None,
    parallel_levels: Optional[Tuple[int, int]] = None,
    file_exporters_levels: Optional[Tuple[int, int]] = None,
    time_levels: Optional[Tuple[int, int]] = None,
    unhandled_errors_levels: Optional[Tuple[int, int]] = None,
):
    r"""Configure the logging settings by changing the configuration yaml file.

    Changes here affect the package globally for current and future use, but won't take effect until the package is re-imported.

    Args:
        setting_type (Optional[str]): ("default", "set_all" or "granular") Controls status of other levels
        set_all_levels (Optional[Tuple[int, int]]): (file_level, console_level) Used if setting_type == "set_all"
        rootsys_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        ho_operators_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        hypergeometric_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        diffusion_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        jumps_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        estimator_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        runner_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        cli_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        data_types_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        validators_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        cache_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        rng_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        parallel_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        file_exporters_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        time_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"
        unhandled_errors_levels (Optional[Tuple[int, int]]): Used if setting_type == "granular"

    """
    granular = {
        "rootsys": rootsys_levels,
        "ho_operators": ho_operators_levels,
        "hypergeometric": hypergeometric_levels,
        "diffusion": diffusion_levels,
        "jumps": jumps_levels,
        "estimator": estimator_levels,
        "runner": runner_levels,
        "cli": cli_levels,
        "data_types": data_types_levels,
        "validators": validators_levels,
        "cache": cache_levels,
        "rng": rng_levels,
        "parallel": parallel_levels,
        "file_exporters": file_exporters_levels,
        "time": time_levels,
        "unhandled_errors": unhandled_errors_levels,
    }

    # Use the context manager to address the yaml changes
    with _LoggerConfig() as config:
        if setting_type is not None:
            assert isinstance(
                setting_type, str
            ), f"setting_type is type '{type(setting_type)}', expected str"
            allowed_sources = ("default", "set_all", "granular")
            assert (
                setting_type in allowed_sources
            ), f"setting_type '{setting_type}' is not in allowed sources '{allowed_sources}'"
            config.data["setting_type"] = setting_type

        if set_all_levels is not None:
            _set_levels(config.data, "set_all", set_all_levels)

        for component, levels in granular.items():
            if levels is not None:
                _set_levels(config.data, component, levels)

        # On exit, context manager exits and writes the changes to config back to the yaml file


def reset_logging():
    """Restore the logger configuration yaml file to its original state.

    Useful to reset to defaults or recover if your changes have broken the file,
    but beware as this will overwrite any modifications in the config.
    """
    config = {"setting_type": "default", "set_all": dict(_DEFAULT_LEVELS)}
    for component in COMPONENTS:
        config[component] = dict(_DEFAULT_LEVELS)

    with open(_config_path, "w") as file:
        yaml.dump(config, file)
