"""Type aliases and assertion helpers for the numerical data passed between modules.

The helpers check shapes and finiteness of caller input and log the failure
before raising, so bad input shows up in the component logs.
"""

from typing import Callable, Dict, List, Sequence, Union

import numpy as np

from holab.tools.logging_ import assert_and_log_error, DataTypesLogger

logger = DataTypesLogger().setup()

# Common types used across the project
Vector = np.ndarray
Matrix = np.ndarray
VectorLike = Union[Sequence[float], np.ndarray, float]
Multiplicities = Union[float, Sequence[float], Dict[str, float]]
FieldCallable = Callable[[np.ndarray], float]
IndexList = List[int]


def as_vector(variable: VectorLike, var_name: str, dim: int) -> Vector:
    """Convert scalars, sequences or arrays to a finite float vector of length ``dim``.

    Args:
        variable: The value to convert.
        var_name (str): The name of the variable being checked.
        dim (int): Expected length.

    Returns:
        Vector: A new 1-d float array.

    Raises:
        AssertionError: If the shape or values are wrong.

    """
    array = np.atleast_1d(np.asarray(variable, dtype=float)).copy()
    assert_and_log_error(
        logger,
        "error",
        array.ndim == 1,
        f"Expected a 1-d vector for '{var_name}', instead got shape {array.shape}",
    )
    assert_and_log_error(
        logger,
        "error",
        array.shape[0] == dim,
        f"Expected '{var_name}' to have length {dim}, instead got {array.shape[0]}",
    )
    assert_and_log_error(
        logger,
        "error",
        bool(np.all(np.isfinite(array))),
        f"'{var_name}' contains non-finite values: {array.tolist()}",
    )
    return array


def assert_and_log_positive(variable: float, var_name: str, allow_zero: bool = False):
    """Assert and log that a number is positive (or non-negative when ``allow_zero``)."""
    ok = variable >= 0 if allow_zero else variable > 0
    relation = ">= 0" if allow_zero else "> 0"
    assert_and_log_error(
        logger,
        "error",
        bool(ok) and np.isfinite(variable),
        f"'{var_name}' must be finite and {relation}, instead got {variable}",
    )


def assert_and_log_matrix(variable: Matrix, var_name: str, columns: int):
    """Assert and log that an array is 2-d with ``columns`` columns."""
    assert_and_log_error(
        logger,
        "error",
        isinstance(variable, np.ndarray) and variable.ndim == 2,
        f"Expected a 2-d array for '{var_name}', instead got '{type(variable)}'",
    )
    assert_and_log_error(
        logger,
        "error",
        variable.shape[1] == columns,
        f"Expected '{var_name}' to have {columns} columns, instead got {variable.shape[1]}",
    )
