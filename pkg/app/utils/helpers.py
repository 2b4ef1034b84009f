import json
import logging
import os
import sys
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version

import pandas as pd

from utils.errors import InvalidInputError

PACKAGE_NAME = "cntflow"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity: int = 0):
    """Configure the root logger once; 1 = DEBUG, 0 = INFO, -1 = WARNING"""
    level = {1: logging.DEBUG, 0: logging.INFO}.get(max(min(verbosity, 1), -1), logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def package_version() -> str:
    try:
        return version(PACKAGE_NAME)
    except PackageNotFoundError:
        return "0+unknown"


def load_config(file_path: str) -> dict:
    """Read a `key = value` config file

    Parameters:
    file_path (str): path to the file; '#' starts a comment, blank lines are skipped

    Returns:
    dict: raw string values keyed by name
    """
    if not os.path.exists(file_path):
        raise InvalidInputError(f"config file not found: {file_path}")

    values = {}
    with open(file_path, "r") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{file_path}:{number}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise InvalidInputError(f"{file_path}:{number}: empty key")
            values[key] = value
    return values


def fmt4(value: float) -> str:
    """Four decimals, the precision of the printed tables"""
    return f"{value:.4f}"


def ensure_parent_dir(file_path: str):
    directory = os.path.dirname(os.path.abspath(file_path))
    if not os.path.exists(directory):
        os.makedirs(directory)


def write_csv(df: pd.DataFrame, file_path: str):
    """Write without index, LF line endings, booleans as true/false

    Floats use pandas' default repr, the shortest string that round-trips.
    """
    ensure_parent_dir(file_path)
    out = df.copy()
    for column in out.columns:
        if out[column].dtype == bool:
            out[column] = out[column].map({True: "true", False: "false"})
    out.to_csv(file_path, index=False, lineterminator="\n")


def read_csv(file_path: str) -> pd.DataFrame:
    """Read a CSV written by `write_csv` back without losing float digits"""
    return pd.read_csv(file_path, float_precision="round_trip")


def sidecar_path(file_path: str) -> str:
    root, _ = os.path.splitext(file_path)
    return f"{root}.meta.json"


def write_sidecar(file_path: str, metadata: dict) -> str:
    """Store run metadata next to a data file; timestamps live only here"""
    payload = {
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": package_version(),
        "data_file": os.path.basename(file_path),
        **metadata,
    }
    path = sidecar_path(file_path)
    ensure_parent_dir(path)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=str)
    return path
