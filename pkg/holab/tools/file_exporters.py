"""Writers for run artefacts: CSV tables through pandas, JSON documents through pydantic.

All files are UTF-8. CSV floats use a round-trip format so reruns of the same
configuration produce byte-identical files.
"""

from typing import Any, Dict, Optional, Union
import json
import os

import pandas as pd
from pydantic import BaseModel

from holab.tools.directory_creators import create_files_directory
from holab.tools.logging_ import (
    FileExportersLogger,
    log_decorator,
    assert_and_log_error,
    log_and_raise_error,
)

logger = FileExportersLogger().setup()

FLOAT_FORMAT = "%.17g"
SCHEMA_VERSION = 1


@log_decorator(logger)
def file_validation(file_path: str, expected_extension: Optional[str] = None) -> str:
    """Validate an output file path and return its extension.

    Args:
        file_path (str): The path to validate.
        expected_extension (Optional[str]): ".csv" or ".json" to enforce, if given.

    Returns:
        str: The extension without the dot, 'csv' or 'json'.

    Raises:
        AssertionError: If the path is not a string or the extension is unsupported.

    """
    assert_and_log_error(
        logger,
        "error",
        isinstance(file_path, str),
        f"file_path argument '{file_path}' is not a string",
    )
    extension = os.path.splitext(file_path)[1].lower()
    if extension not in (".csv", ".json"):
        log_and_raise_error(
            logger,
            "error",
            AssertionError,
            f"Output path '{file_path}' is not one of the supported file types (.csv, .json)",
        )
    if expected_extension is not None:
        assert_and_log_error(
            logger,
            "error",
            extension == expected_extension,
            f"Output path '{file_path}' must end with '{expected_extension}'",
        )
    return extension[1:]


def _prepare(file_path: str, expected_extension: str) -> str:
    file_validation(file_path, expected_extension)
    directory = os.path.dirname(os.path.abspath(file_path))
    create_files_directory(logger, directory)
    return file_path


@log_decorator(logger, suffix_message="Write dataframe to csv")
def write_csv(df: pd.DataFrame, file_path: str) -> str:
    """Write a dataframe with a header row and round-trip float formatting.

    Returns:
        str: The written path.

    """
    _prepare(file_path, ".csv")
    df.to_csv(
        file_path,
        index=False,
        float_format=FLOAT_FORMAT,
        encoding="utf-8",
        lineterminator="\n",
    )
    logger.info(f" | Function | write_csv() | Action | '{file_path}' | {len(df)} rows")
    return file_path


@log_decorator(logger, suffix_message="Write model or mapping to json")
def write_json(document: Union[BaseModel, Dict[str, Any]], file_path: str) -> str:
    """Write a pydantic model (by alias) or a plain mapping as indented JSON.

    Keys are sorted so equal documents produce equal bytes.

    Returns:
        str: The written path.

    """
    _prepare(file_path, ".json")
    if isinstance(document, BaseModel):
        payload = document.model_dump(mode="json", by_alias=True)
    else:
        payload = document
    with open(file_path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, allow_nan=True)
        handle.write("\n")
    logger.info(f" | Function | write_json() | Action | '{file_path}'")
    return file_path
