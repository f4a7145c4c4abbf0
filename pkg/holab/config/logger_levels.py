"""Stores and distributes the logging levels for the components of the package based on the logging configuration retrieved from `access_logging_config`.

The module supports configurations that allow uniform logging levels across all components or granular levels for each component individually.

Logger levels should not be configured from this object, but instead from the `configure_logging()`
function in the `logger_config` module.

Attributes
----------
set_all_file_log_level : int
    The default logging level for files.
set_all_console_log_level : int
    The default logging level for console output.
levels : Dict[str, Tuple[int, int]]
    (file_level, console_level) for each component named in ``COMPONENTS``.

"""

from typing import Dict, Tuple

from holab.config.logger_config import access_logging_config, COMPONENTS

# Logging levels
# This sets the minimum level of logging each logger_arg will save to the file or print to the console
# Levels - 0 NOTSET | 10 DEBUG | 20 INFO | 30 WARNING | 40 ERROR | 50 CRITICAL

_config = access_logging_config()

# -----------------
# Set all levels
# -----------------
# The set all vars can be changed in different ways by either the default or set_all conditions
if _config["setting_type"] == "set_all":
    set_all_file_log_level: int = _config["set_all"]["file"]
    set_all_console_log_level: int = _config["set_all"]["console"]
else:
    set_all_file_log_level: int = 99
    set_all_console_log_level: int = 20

# -----------------
# Distributing values across loggers
# -----------------
levels: Dict[str, Tuple[int, int]] = {}
for _component in COMPONENTS:
    # Use each individual logger's config if "granular" is the current setting type
    if _config["setting_type"] == "granular":
        _entry = _config.get(_component, {"file": 90, "console": 20})
        levels[_component] = (_entry["file"], _entry["console"])
    else:
        levels[_component] = (set_all_file_log_level, set_all_console_log_level)


def file_level(component: str) -> int:
    """Return the file log level for a component."""
    return levels[component][0]


def console_level(component: str) -> int:
    """Return the console log level for a component."""
    return levels[component][1]
