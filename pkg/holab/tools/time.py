"""Wall clock helpers: runtime formatting and the LogBlock timing context manager.

Wall clock values only ever reach the run manifest's ``timestamp`` field, so
numerical results stay byte-comparable between reruns.
"""

from datetime import datetime, timezone
from typing import Optional
import logging
import time

from holab.tools.logging_ import TimeToolsLogger, log_decorator

logger = TimeToolsLogger().setup()


def delta_time_formatter(total_seconds: float) -> str:
    """Format seconds as 'HHhMMmSSs' (e.g '05h30m45s')."""
    hours = int(total_seconds // 3600)
    minutes = int((total_seconds % 3600) // 60)
    seconds = int(total_seconds % 60)
    return f"{hours:02d}h{minutes:02d}m{seconds:02d}s"


def utc_timestamp() -> str:
    """Current UTC time in ISO 8601 form, second resolution."""
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


class LogBlock:
    """Context manager that logs the time elapsed over a block.

    The runner wraps every experiment in one and copies ``started_at`` and
    ``elapsed_seconds`` into the manifest timestamp field.

    Example:
        >>> with LogBlock("lln B2"):
        >>>    run_experiment()

    """

    decorator_message = "in LogBlock"

    @log_decorator(logger, show_nesting=False, suffix_message=decorator_message)
    def __init__(self, message: str, logger_arg: logging.Logger = logger):
        """Initialize LogBlock with a custom message and the logger to report to.

        Args:
            message (str): A custom message to include in the log.
            logger_arg (logging.Logger): Logger used for the runtime message. Defaults to module logger.

        """
        self.message = message
        self.logger = logger_arg
        self.started_at: Optional[str] = None
        self.elapsed_seconds: Optional[float] = None

    def __enter__(self):
        """Record the start time at the entry of the block."""
        self.started_at = utc_timestamp()
        self._start_time: float = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_value, exc_tb):
        """Log the total runtime at the exit of the block."""
        self.elapsed_seconds = time.perf_counter() - self._start_time
        delta_time = delta_time_formatter(self.elapsed_seconds)
        delta_seconds = f"{format(self.elapsed_seconds, ',.4f')} sec"
        self.logger.info(
            f" | Class | LogBlock | Finish | Total runtime - {self.message} | | | {delta_time} | {delta_seconds}"
        )
