# app/utils/config.py
from dataclasses import dataclass, field
import json
import logging
import os
from pathlib import Path
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dotenv import load_dotenv

from ..constants import DEFAULT_SAMPLES, DEFAULT_SEED, FAR_FIELD_RADIUS, POINTS_PER_LEVEL
from ..exceptions import ConfigError

load_dotenv()

REPO_ROOT = Path(__file__).resolve().parent.parent.parent

# Runtime Configuration
TODA_CFT_THREADS = int(os.getenv("TODA_CFT_THREADS") or os.cpu_count() or 1)
TODA_CFT_LOG_DIR = Path(os.getenv("TODA_CFT_LOG_DIR") or REPO_ROOT / "logs")
TODA_CFT_OUTPUT_DIR = Path(os.getenv("TODA_CFT_OUTPUT_DIR") or REPO_ROOT / "output")
TODA_CFT_SEED = int(os.getenv("TODA_CFT_SEED") or DEFAULT_SEED)

RUN_KINDS = ("toda", "liouville", "extended")
COMPARE_TARGETS = {"toda": "fali", "liouville": "dozz", "extended": "dozz"}


@dataclass(frozen=True)
class RunConfig:
    """
    Validated Monte-Carlo run configuration.

    Attributes:
        kind (str): "toda", "liouville" or "extended".
        gamma (float): Toda coupling, or the Liouville coupling gamma_tilde.
        mu (tuple): (mu1, mu2) for Toda, (mu,) for Liouville.
        weights (dict): {"alpha0", "kappa", "alpha_inf"} or {"a1", "a2", "a3"}.
        levels (tuple): Refinement levels to run.
        R (float): Far-field cutoff radius.
        points_per_level (tuple): Point budget per level.
        n_samples (int): Samples per level.
        seed (int): Master seed.
        compare (str): Exact formula to compare with, or None.
        source (dict): The raw document, used for the manifest hash.
    """
    kind: str
    gamma: float
    mu: tuple
    weights: dict
    levels: tuple = (0, 1, 2)
    R: float = FAR_FIELD_RADIUS
    points_per_level: tuple = POINTS_PER_LEVEL
    n_samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    compare: str = None
    source: dict = field(default_factory=dict, compare=False)


def _read_document(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file {path} does not exist")
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot parse {path}: {e}")


def _number(document, key, cast=float, default=None):
    value = document.get(key, default)
    if value is None:
        raise ConfigError(f"Missing required field '{key}'")
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"Field '{key}' must be a {cast.__name__}, got {value!r}")


def build_run_config(document):
    """
    Validate a run-config mapping.

    Args:
        document (dict): Parsed TOML / JSON document.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigError: On any missing or out-of-range field.
    """
    if not isinstance(document, dict):
        raise ConfigError("Run config must be a mapping")
    kind = document.get("kind", "toda")
    if kind not in RUN_KINDS:
        raise ConfigError(f"kind must be one of {RUN_KINDS}, got {kind!r}")
    gamma = _number(document, "gamma")
    upper = 2.0 if kind != "toda" else 2.0 ** 0.5
    if not 0.0 < gamma < upper:
        raise ConfigError(f"gamma must lie in (0, {upper:.4f}) for kind {kind}, got {gamma}")

    mu = document.get("mu", 1.0)
    mu = tuple(mu) if isinstance(mu, (list, tuple)) else (mu,)
    try:
        mu = tuple(float(m) for m in mu)
    except (TypeError, ValueError):
        raise ConfigError(f"mu must be numeric, got {document.get('mu')!r}")
    if kind == "toda" and len(mu) == 1:
        mu = mu * 2
    if min(mu) <= 0.0 or len(mu) != (2 if kind == "toda" else 1):
        raise ConfigError(f"mu has the wrong shape or sign for kind {kind}: {mu}")

    weights = document.get("weights")
    required = ("alpha0", "kappa", "alpha_inf") if kind == "toda" else ("a1", "a2", "a3")
    if not isinstance(weights, dict) or any(k not in weights for k in required):
        raise ConfigError(f"weights must provide {required}")

    grid = document.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("grid must be a mapping")
    try:
        levels = tuple(int(x) for x in grid.get("levels", (0, 1, 2)))
        points_per_level = tuple(int(x) for x in grid.get("points_per_level", POINTS_PER_LEVEL))
        R = float(grid.get("R", FAR_FIELD_RADIUS))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid grid section: {e}")
    if not levels or min(levels) < 0 or max(levels) >= len(points_per_level):
        raise ConfigError(f"levels {levels} do not index points_per_level {points_per_level}")
    if R <= 1.5:
        raise ConfigError(f"grid.R must exceed 1.5, got {R}")

    n_samples = _number(document, "n_samples", int, DEFAULT_SAMPLES)
    if n_samples < 2:
        raise ConfigError(f"n_samples must be at least 2, got {n_samples}")
    seed = _number(document, "seed", int, TODA_CFT_SEED)
    compare = document.get("compare")
    if compare is True:
        compare = COMPARE_TARGETS[kind]
    if compare not in (None, False, COMPARE_TARGETS[kind]):
        raise ConfigError(f"compare must be '{COMPARE_TARGETS[kind]}' for kind {kind}, got {compare!r}")

    return RunConfig(kind, gamma, mu, dict(weights), levels, R, points_per_level, n_samples, seed,
                     compare or None, dict(document))


def load_run_config(path, overrides=None):
    """
    Read a TOML or JSON run config, apply CLI overrides and validate it.

    Args:
        path (str): Config file, or None when everything comes from overrides.
        overrides (dict): Top-level fields that replace those of the file.

    Returns:
        RunConfig: The validated configuration.
    """
    document = _read_document(path) if path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            document[key] = value
    config = build_run_config(document)
    logging.info(f"Loaded {config.kind} run config: gamma={config.gamma}, levels={config.levels}, n={config.n_samples}")
    return config
