# Import the python logging module
import logging

# Import the internal logging module
# Contains the global syshook logger which is set on import
from . import logging_


class Loggers:
    """Centralized lazy access to the component loggers.

    An instance called `loggers` is created on importing holab. Each property
    builds its logger on first access and returns the same object afterwards.
    """

    _classes = {
        "rootsys": logging_.RootsysLogger,
        "ho_operators": logging_.HoOperatorsLogger,
        "hypergeometric": logging_.HypergeometricLogger,
        "diffusion": logging_.DiffusionLogger,
        "jumps": logging_.JumpsLogger,
        "estimator": logging_.EstimatorLogger,
        "runner": logging_.RunnerLogger,
        "cli": logging_.CliLogger,
        "data_types": logging_.DataTypesLogger,
        "validators": logging_.ValidatorsLogger,
        "cache": logging_.CacheLogger,
        "rng": logging_.RngLogger,
        "parallel": logging_.ParallelLogger,
        "file_exporters": logging_.FileExportersLogger,
        "time_tools": logging_.TimeToolsLogger,
    }

    # Note - unhandled errors are not exposed, nothing outside the hook should log there.

    def __init__(self):
        """All loggers start unset and are created upon first access."""
        self._cache = {}

    def _get_or_create_logger(self, name: str) -> logging.Logger:
        """Get an existing logger by component name or create one with its logger class.

        Args:
            name (str): The component name.

        Returns:
            logging.Logger: The logger instance.

        """
        if name not in self._cache:
            logger_class = self._classes[name]
            existing_logger = logging.getLogger(logger_class.logger_name)
            if existing_logger.hasHandlers() and existing_logger.handlers:
                self._cache[name] = existing_logger
            else:
                self._cache[name] = logger_class().setup()
        return self._cache[name]

    @property
    def rootsys(self) -> logging.Logger:
        """Root systems, Weyl groups and chamber decompositions."""
        return self._get_or_create_logger("rootsys")

    @property
    def ho_operators(self) -> logging.Logger:
        """Drift, jump rates and finite-difference operators."""
        return self._get_or_create_logger("ho_operators")

    @property
    def hypergeometric(self) -> logging.Logger:
        """Rank-1 F and G oracle."""
        return self._get_or_create_logger("hypergeometric")

    @property
    def diffusion(self) -> logging.Logger:
        """Radial paths and mirror coupling."""
        return self._get_or_create_logger("diffusion")

    @property
    def jumps(self) -> logging.Logger:
        """Thinning and skew-product constructions."""
        return self._get_or_create_logger("jumps")

    @property
    def estimator(self) -> logging.Logger:
        """Monte Carlo estimates and experiments."""
        return self._get_or_create_logger("estimator")

    @property
    def runner(self) -> logging.Logger:
        """Config parsing and experiment runs."""
        return self._get_or_create_logger("runner")

    @property
    def cli(self) -> logging.Logger:
        """Command line front end."""
        return self._get_or_create_logger("cli")

    @property
    def data_types(self) -> logging.Logger:
        """Data type checks."""
        return self._get_or_create_logger("data_types")

    @property
    def validators(self) -> logging.Logger:
        """Pydantic validation models."""
        return self._get_or_create_logger("validators")

    @property
    def cache(self) -> logging.Logger:
        """Ensemble cache hits and writes."""
        return self._get_or_create_logger("cache")

    @property
    def rng(self) -> logging.Logger:
        """Keyed random streams."""
        return self._get_or_create_logger("rng")

    @property
    def parallel(self) -> logging.Logger:
        """Process pool map."""
        return self._get_or_create_logger("parallel")

    @property
    def file_exporters(self) -> logging.Logger:
        """CSV and JSON writers."""
        return self._get_or_create_logger("file_exporters")

    @property
    def time_tools(self) -> logging.Logger:
        """LogBlock timings."""
        return self._get_or_create_logger("time_tools")


loggers = Loggers()
