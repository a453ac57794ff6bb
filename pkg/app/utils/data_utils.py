# app/utils/data_utils.py

from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
import hashlib
import json
import logging
import math
from pathlib import Path
import subprocess
import sys

import numpy as np
import pandas as pd

from ..constants import FLOAT_FORMAT
from ..root_system import WeightVector
from .config import REPO_ROOT


def to_jsonable(obj):
    """
    Converts numpy scalars, arrays, tuples and non-finite floats into plain JSON values.

    Non-finite floats become the strings "inf", "-inf" and "nan" so that every line stays valid JSON.

    Args:
        obj: Any nesting of dicts, lists, tuples and numbers.

    Returns:
        The converted object.
    """
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(value) for value in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def canonical_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(document):
    """SHA-256 of the canonical JSON form of a config document."""
    return hashlib.sha256(canonical_json(document).encode("utf-8")).hexdigest()


def git_describe():
    """
    Returns `git describe --always --dirty` for the repository, or "unknown".
    """
    try:
        result = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=REPO_ROOT,
                                capture_output=True, text=True, timeout=10)
    except (OSError, subprocess.SubprocessError) as e:
        logging.warning(f"git describe unavailable ---- Error: {str(e)}")
        return "unknown"
    return result.stdout.strip() if result.returncode == 0 and result.stdout.strip() else "unknown"


def weight_from_value(data):
    """
    Builds a weight from {"basis": "omega"|"root"|"euclid", "coords": [c1, c2]} or a bare [c1, c2] (omega basis).

    Raises:
        ValueError: Malformed coordinates.
    """
    if isinstance(data, (list, tuple)):
        data = {"basis": "omega", "coords": list(data)}
    if not isinstance(data, dict):
        raise ValueError(f"Weight must be a JSON object or a two-element list, got {data!r}")
    try:
        return WeightVector.from_json(data)
    except Exception as e:
        raise ValueError(str(e))


def parse_weight(text):
    """
    Parses a weight given on the command line as JSON text.

    Args:
        text (str): JSON text, see weight_from_value.

    Returns:
        WeightVector: The weight.

    Raises:
        ValueError: Malformed JSON or coordinates.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"Weight is not valid JSON: {e}")
    return weight_from_value(data)


def write_json(payload, path=None):
    """
    Writes a single JSON document to path, or to stdout when path is None.
    """
    text = json.dumps(to_jsonable(payload), indent=2)
    if path is None:
        print(text)
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")
    logging.info(f"Wrote {path}")
    return path


class JsonLinesWriter:
    """
    Appends result rows to a JSON-lines file, one flushed line per row.

    Attributes:
        path (Path): Output file, or None for stdout.
        rows (int): Rows written so far.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self.rows = 0
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("", encoding="utf-8")

    def append(self, row):
        line = json.dumps(to_jsonable(row))
        if self.path is None:
            print(line, flush=True)
        else:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line + "\n")
                f.flush()
        self.rows += 1


def read_jsonl(path):
    """Loads a JSON-lines result file into a DataFrame."""
    return pd.read_json(path, orient="records", lines=True)


def write_csv(df, path=None):
    """
    Writes a DataFrame as CSV with 17 significant digits, to path or stdout.
    """
    if path is None:
        df.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT)
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logging.info(f"Wrote {len(df)} rows to {path}")
    return path


@dataclass
class RunManifest:
    """
    Everything needed to reproduce a run.

    Attributes:
        command (str): CLI subcommand.
        parameters (dict): Effective parameters.
        seed (int): Master seed, or None.
        config_hash (str): SHA-256 of the canonical config.
        git_describe (str): Source revision.
        outputs (list): Output paths.
        status (str): "completed", "interrupted" or "failed".
        timestamp (str): UTC start time, ISO 8601.
    """
    command: str
    parameters: dict
    seed: int = None
    config_hash: str = None
    git_describe: str = None
    outputs: list = field(default_factory=list)
    status: str = "completed"
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @classmethod
    def create(cls, command, parameters, seed=None, outputs=()):
        return cls(command, to_jsonable(parameters), seed, config_hash(parameters), git_describe(),
                   [str(p) for p in outputs])

    def write(self, path):
        return write_json(asdict(self), path)


def manifest_path(output_path):
    """<name>.manifest.json next to an output file."""
    output_path = Path(output_path)
    return output_path.with_name(output_path.stem + ".manifest.json")
