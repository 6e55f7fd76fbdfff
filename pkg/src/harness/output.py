"""JSON and CSV emission with atomic replacement of the target file."""

import json
import logging
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from src.restoration.extended import ExtendedReal

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def to_jsonable(value: Any) -> Any:
    """Convert results to plain JSON types; infinities become '+inf'/'-inf'."""
    if isinstance(value, ExtendedReal):
        return value.to_json()
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "+inf" if number > 0 else "-inf"
        return number
    if isinstance(value, Fraction):
        return str(value)
    return value


def build_record(command: str, config: dict, result: dict) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": to_jsonable(config),
        "result": to_jsonable(result),
    }


def _atomic_write(path: str, write) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            write(handle)
        os.replace(temp_path, target)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def write_json(record: dict, path: Optional[str]) -> None:
    """Write one JSON record to `path`, or to stdout when path is None.

    Floats are written with repr, the shortest string that round-trips, so
    identical runs produce identical bytes.
    """
    text = json.dumps(record, indent=2, sort_keys=False, allow_nan=False)
    if path is None:
        sys.stdout.write(text + "\n")
        return
    _atomic_write(path, lambda handle: handle.write(text + "\n"))
    logger.info(f"Wrote {path}")


def write_csv(frame: pd.DataFrame, path: str) -> None:
    _atomic_write(path, lambda handle: frame.to_csv(handle, index=False, float_format="%.17g"))
    logger.info(f"Wrote {path}")
