"""Logging setup shared by every component of the laboratory.

Defines the error helpers used for all rejections, the start/finish decorator,
the global unhandled-exception hook and one logger class per component.
"""

from typing import Type, Callable, Optional
from functools import wraps
import traceback
import logging
import os
import sys

from holab.tools.directory_creators import check_logs_directory
import holab.config.logger_levels as logger_levels

_FORMAT_STRING = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
_ERROR_LEVELS = ("warning", "error", "critical")


def log_and_raise_error(
    logger_arg: logging.Logger,
    level: str,
    error_type: Type[BaseException],
    message: str,
    include_traceback: bool = False,
):
    """Log and raise an error with the same message string.

    The raised class subclasses ``error_type``, so callers catch the builtin
    (``ValueError``, ``RuntimeError`` ...) while the global hook recognises it
    as already logged.

    Args:
        logger_arg (logging.Logger): Logger instance to log the error.
        level (str): Level of the log, must be one of 'warning', 'error', or 'critical'.
        error_type (Type[BaseException]): The type of exception to raise.
        message (str): The error message to log and raise.
        include_traceback (bool, optional): Whether to include the traceback in the log. Defaults to False.

    Raises:
        HandledError: The logged error, subclass of ``error_type``.

    """

    # This class name is what the global hook checks to see if an error is handled
    class HandledError(error_type):
        """Marks an error that has already been logged."""

        pass

    if level.lower() not in _ERROR_LEVELS:
        bad_level = (
            f"AssertionError - Level argument {level} "
            f"is not one of the allowed levels {_ERROR_LEVELS}"
        )
        logger_arg.error(bad_level)
        raise HandledError(bad_level)

    error_message = f" | Function | log_and_raise_error() | Exit | {message} | {error_type.__name__}"
    if include_traceback:
        formatted = traceback.format_exc().replace("\n", "\\n")
        error_message = f"{error_message} | \\n{formatted}"

    getattr(logger_arg, level.lower())(error_message)
    raise HandledError(message)


def assert_and_log_error(
    logger_arg: logging.Logger,
    level: str,
    condition: bool,
    message: str,
    include_traceback: bool = False,
):
    """Assert a condition and log the specified error.

    Args:
        logger_arg (logging.Logger): Logger instance to log the error.
        level (str): Level of the log, must be one of 'warning', 'error', or 'critical'.
        condition (bool): Condition to be asserted.
        message (str): The error message to log if the assertion fails.
        include_traceback (bool, optional): Whether to include the traceback in the log. Defaults to False.

    """
    if not condition:
        log_and_raise_error(
            logger_arg, level, AssertionError, message, include_traceback
        )


def _check_logger_exists(logger_name: str) -> bool:
    """Check if a logger with the provided name exists."""
    return logger_name in logging.Logger.manager.loggerDict.keys()


nesting_level = 0


def log_decorator(
    logger_arg: logging.Logger,
    level: str = "debug",
    start: str = "Start",
    finish: str = "Finish",
    suffix_message: Optional[str] = None,
    is_static_method: bool = False,
    is_property: bool = False,
    show_nesting: bool = True,
) -> Callable:
    """Decorate a function to log the start and end of its execution.

    Args:
        logger_arg (logging.Logger): Logger instance to log messages.
        level (str, optional): Log level for both start and finish messages, or "off". Defaults to "debug".
        start (str, optional): Start message text. Defaults to "Start".
        finish (str, optional): Finish message text. Defaults to "Finish".
        suffix_message (str, optional): Additional suffix message. Defaults to None.
        is_static_method (bool, optional): Indicates if the decorated function is a static method. Defaults to False.
        is_property (bool, optional): Indicates if the decorated function is a property. Defaults to False.
        show_nesting (bool, optional): Indicates if nesting information should be included. Defaults to True.

    Raises:
        AssertionError: If the provided level is not one of the allowed levels.

    Returns:
        Callable: The decorated function.

    """
    if is_static_method:
        prefix = "Static method"
    elif is_property:
        prefix = "Property"
    else:
        prefix = "Function"

    allowed = ("off", "debug", "info", "warning", "error", "critical")
    if level not in allowed:
        raise AssertionError(
            f"Level argument '{level}' is not in available levels list: {allowed}"
        )

    def outer_wrapper(func: Callable) -> Callable:
        parts = [prefix, func.__name__ + "()"]
        suffix = [suffix_message] if suffix_message is not None else []
        start_message = " | ".join(parts + [start] + suffix)
        finish_message = " | ".join(parts + [finish] + suffix)

        @wraps(func)
        def inner_wrapper(*args, **kwargs):
            global nesting_level
            if level == "off":
                return func(*args, **kwargs)
            emit = getattr(logger_arg, level)
            nesting_level += 1
            nesting_prefix = f"Nest {nesting_level} | " if show_nesting else " | "
            emit(nesting_prefix + start_message)
            try:
                result = func(*args, **kwargs)
            finally:
                nesting_level -= 1
            emit(nesting_prefix + finish_message)
            return result

        return inner_wrapper

    return outer_wrapper


def logger_setup(
    logger_name: str,
    format_string: str,
    file_log_level: int,
    console_log_level: int,
    log_file_path: str,
) -> logging.Logger:
    """Initialize, configure, and return a logger instance.

    An existing logger of the same name is returned untouched.

    Args:
        logger_name (str): The name of the logger.
        format_string (str): The format string for the log messages.
        file_log_level (int): The log level for the file handler.
        console_log_level (int): The log level for the console handler.
        log_file_path (str): The path to the log file.

    Returns:
        logging.Logger: The configured logger instance.

    """
    if _check_logger_exists(logger_name):
        return logging.getLogger(logger_name)

    logger = logging.getLogger(logger_name)
    # 1, not 0: NOTSET would defer to the root logger's level
    logger.setLevel(1)
    formatter = logging.Formatter(format_string)

    file_handler = logging.FileHandler(log_file_path, delay=True)
    file_handler.setLevel(file_log_level)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(console_log_level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    return logger


def global_exception_logger(exctype, value, tb):
    """Global exception handler that logs uncaught exceptions at CRITICAL.

    Installed as ``sys.excepthook`` on import. Exceptions raised through
    ``log_and_raise_error`` are skipped since they were logged when raised.

    Args:
        exctype (type): The exception type.
        value (BaseException): The exception instance raised.
        tb (traceback): Traceback object.

    """
    if exctype.__name__ == "HandledError":
        return

    try:
        file_level, console_level = logger_levels.levels["unhandled_errors"]
        logger = logger_setup(
            "unhandled_errors",
            _FORMAT_STRING,
            max(file_level, logging.ERROR),
            max(console_level, logging.ERROR),
            os.path.join(check_logs_directory()[2], "base.log"),
        )
        formatted_exception = "".join(traceback.format_exception(exctype, value, tb))
        flattened = formatted_exception.replace("\n", "\\n")
        logger.critical(
            f" | Function | global_exception_logger() | Exit | | {exctype.__name__} | \\n{flattened}"
        )
    except Exception as handler_error:
        print(f"Error in global_exception_logger: {handler_error}", file=sys.stderr)
        print("Original exception was:", file=sys.stderr)
        traceback.print_exception(exctype, value, tb)


sys.excepthook = global_exception_logger


class BaseLogger:
    """Base class for setting up loggers.

    Attributes:
        logger_name (str): The name of the logger.
        file_log_level (int): Log level for the file handler.
        console_log_level (int): Log level for the console handler.
        log_file_name (str): Name of the log file.
        format_string (str): Format string for log messages.
        log_file_path (str): Full path to the log file.

    """

    def __init__(
        self,
        logger_name: str,
        file_log_level: int,
        console_log_level: int,
        log_file_name: str = "base.log",
    ):
        """Initialize the BaseLogger instance and make sure the logs directory exists."""
        self.logger_name: str = logger_name
        self.file_log_level: int = file_log_level
        self.console_log_level: int = console_log_level
        self.log_file_name: str = log_file_name
        self.format_string: str = _FORMAT_STRING

        log_dir_exists, log_message, log_directory = check_logs_directory()
        self.log_file_path = os.path.join(log_directory, self.log_file_name)

        logging_logger = logger_setup(
            "logging_logger",
            self.format_string,
            self.file_log_level,
            self.console_log_level,
            self.log_file_path,
        )
        if log_dir_exists:
            logging_logger.debug(log_message)
        else:
            logging_logger.info(log_message)

    def setup(self) -> logging.Logger:
        """Set up the logger.

        Returns:
            logging.Logger: The configured logger instance.

        """
        return logger_setup(
            self.logger_name,
            self.format_string,
            self.file_log_level,
            self.console_log_level,
            self.log_file_path,
        )


class _ComponentLogger(BaseLogger):
    """BaseLogger whose levels are read from the component's entry in the level config."""

    component: str = ""
    logger_name: str = ""

    def __init__(self):
        """Resolve the levels for ``component`` and initialise the base logger."""
        file_level, console_level = logger_levels.levels[self.component]
        super().__init__(
            logger_name=type(self).logger_name,
            file_log_level=file_level,
            console_log_level=console_level,
        )


# Levels - 0 NOTSET | 10 DEBUG | 20 INFO | 30 WARNING | 40 ERROR | 50 CRITICAL
class RootsysLogger(_ComponentLogger):
    """Logger for root systems, Weyl groups and chamber decompositions."""

    component = "rootsys"
    logger_name = "processors.rootsys"


class HoOperatorsLogger(_ComponentLogger):
    """Logger for drift, jump coefficients and finite-difference operators."""

    component = "ho_operators"
    logger_name = "processors.ho_operators"


class HypergeometricLogger(_ComponentLogger):
    """Logger for the rank-1 hypergeometric oracle."""

    component = "hypergeometric"
    logger_name = "processors.hypergeometric"


class DiffusionLogger(_ComponentLogger):
    """Logger for radial simulation and mirror coupling."""

    component = "diffusion"
    logger_name = "processors.diffusion"


class JumpsLogger(_ComponentLogger):
    """Logger for the full jump process constructions."""

    component = "jumps"
    logger_name = "processors.jumps"


class EstimatorLogger(_ComponentLogger):
    """Logger for the Monte Carlo estimators and experiments."""

    component = "estimator"
    logger_name = "processors.estimator"


class RunnerLogger(_ComponentLogger):
    """Logger for config parsing and experiment orchestration."""

    component = "runner"
    logger_name = "processors.runner"


class CliLogger(_ComponentLogger):
    """Logger for the command line front end."""

    component = "cli"
    logger_name = "cli"


class DataTypesLogger(_ComponentLogger):
    """Logger for handling data type validations."""

    component = "data_types"
    logger_name = "validation.data_types"


class ValidatorsLogger(_ComponentLogger):
    """Logger for handling validation models."""

    component = "validators"
    logger_name = "validation.validators"


class CacheLogger(_ComponentLogger):
    """Logger for the on-disk ensemble cache."""

    component = "cache"
    logger_name = "tools.caching"


class RngLogger(_ComponentLogger):
    """Logger for keyed random streams."""

    component = "rng"
    logger_name = "tools.rng"


class ParallelLogger(_ComponentLogger):
    """Logger for the process pool map."""

    component = "parallel"
    logger_name = "tools.parallel"


class FileExportersLogger(_ComponentLogger):
    """Logger for CSV and JSON writers."""

    component = "file_exporters"
    logger_name = "tools.file_exporters"


class TimeToolsLogger(_ComponentLogger):
    """Logger for handling time related functions."""

    component = "time"
    logger_name = "tools.time"
