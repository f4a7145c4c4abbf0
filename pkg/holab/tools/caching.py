"""On-disk cache for simulated ensembles.

Ensemble runners decorated with :func:`ensemble_cache` are looked up by a
sha256 key of their arguments. The thread budget is never part of the key,
since results do not depend on it.
"""

from typing import Any, Callable, Tuple
from functools import wraps
import hashlib
import inspect
import json
import os

import numpy as np
from diskcache import Cache
from pydantic import BaseModel

from holab.tools.directory_creators import create_caches_directory
from holab.tools.logging_ import CacheLogger, log_decorator

logger = CacheLogger().setup()

_IGNORED_ARGUMENTS = ("threads", "use_cache")


@log_decorator(logger, suffix_message="Check or create cache, return object and path")
def _cache_creator(cache_dir: str, max_mb_size: int) -> Tuple[Cache, str]:
    """Create a cache if it doesn't already exist and return the cache object and its path.

    Args:
        cache_dir: Directory where the cache will be stored, relative to the caches directory.
        max_mb_size: Maximum size of the cache in megabytes.

    Returns:
        Tuple containing the Cache object and the full path to the cache directory.

    """
    full_cache_dir = os.path.join(create_caches_directory(logger), cache_dir)
    max_size = max_mb_size * 1024 * 1024
    cache = Cache(full_cache_dir, size_limit=max_size)
    return cache, full_cache_dir


def _key_default(value: Any) -> Any:
    """JSON fallback for the argument types ensemble runners take."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if hasattr(value, "cache_key"):
        return value.cache_key()
    return repr(value)


def cache_key(function_name: str, arguments: dict) -> str:
    """sha256 hex digest of the function name and its keyed arguments."""
    kept = {
        name: value
        for name, value in arguments.items()
        if name not in _IGNORED_ARGUMENTS
    }
    text = json.dumps(
        {"function": function_name, "arguments": kept},
        sort_keys=True,
        default=_key_default,
    )
    return hashlib.sha256(text.encode()).hexdigest()


def ensemble_cache(cache_dir: str = "ensembles", max_mb_size: int = 1000) -> Callable:
    """Decorate an ensemble runner so results are reused across runs.

    The decorated function must accept a ``use_cache`` keyword. When it is
    False the function simply runs. When True the result is taken from the
    cache if present, otherwise computed and stored. When max size is reached
    the least recently used entries are culled.

    Args:
        cache_dir: Directory where the cache will be stored.
        max_mb_size (optional): Maximum size of the cache in megabytes. Defaults to 1000.

    Returns:
        A decorator that caches the result of the decorated function.

    """

    def _decorator(func: Callable) -> Callable:
        signature = inspect.signature(func)
        state = {"cache": None, "path": None}

        @wraps(func)
        def _wrapper(*args, **kwargs):
            bound = signature.bind(*args, **kwargs)
            bound.apply_defaults()
            if not bound.arguments.get("use_cache", False):
                return func(*args, **kwargs)

            if state["cache"] is None:
                state["cache"], state["path"] = _cache_creator(cache_dir, max_mb_size)
            cache = state["cache"]
            key = cache_key(func.__name__, dict(bound.arguments))
            if key in cache:
                logger.info(
                    f" | Step | ensemble_cache() | Action | Ensemble reused | CACHE | {func.__name__} | {key[:12]} | {state['path']}"
                )
                return cache[key]

            result = func(*args, **kwargs)
            cache[key] = result
            logger.info(
                f" | Step | {func.__name__}() | Action | Ensemble stored | SIMULATED | {key[:12]}"
            )
            return result

        return _wrapper

    return _decorator
