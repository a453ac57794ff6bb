# tests/test_config.py
import json

import pytest

from app.constants import POINTS_PER_LEVEL
from app.exceptions import ConfigError
from app.utils.config import build_run_config, load_run_config

TODA = {"kind": "toda", "gamma": 0.4, "mu": 1.0,
        "weights": {"alpha0": [4.8, 4.8], "kappa": 4.8, "alpha_inf": [4.8, 4.8]}}
LIOUVILLE = {"kind": "liouville", "gamma": 1.4, "weights": {"a1": 1.2, "a2": 1.2, "a3": 1.2}}


def test_defaults():
    config = build_run_config(TODA)
    assert config.mu == (1.0, 1.0)
    assert config.levels == (0, 1, 2)
    assert config.points_per_level == POINTS_PER_LEVEL
    assert config.compare is None
    assert build_run_config(LIOUVILLE).mu == (1.0,)


def test_compare_true_selects_the_matching_formula():
    assert build_run_config({**TODA, "compare": True}).compare == "fali"
    assert build_run_config({**LIOUVILLE, "compare": True}).compare == "dozz"
    assert build_run_config({**LIOUVILLE, "kind": "extended", "compare": "dozz"}).compare == "dozz"


@pytest.mark.parametrize("change", [
    {"kind": "bosonic"},
    {"gamma": 1.5},
    {"gamma": "strong"},
    {"mu": [1.0, -1.0]},
    {"mu": [1.0, 1.0, 1.0]},
    {"weights": {"alpha0": [1.0, 1.0]}},
    {"grid": {"levels": [3]}},
    {"grid": {"R": 1.2}},
    {"grid": "fine"},
    {"n_samples": 1},
    {"compare": "dozz"},
])
def test_invalid_toda_configs(change):
    with pytest.raises(ConfigError):
        build_run_config({**TODA, **change})


def test_liouville_allows_larger_coupling():
    assert build_run_config({**LIOUVILLE, "gamma": 1.9}).gamma == 1.9
    with pytest.raises(ConfigError):
        build_run_config({**LIOUVILLE, "mu": [1.0, 1.0]})
    with pytest.raises(ConfigError):
        build_run_config({**LIOUVILLE, "gamma": 2.0})


def test_missing_gamma():
    with pytest.raises(ConfigError):
        build_run_config({"kind": "toda", "weights": TODA["weights"]})


def test_load_toml_with_overrides(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        'kind = "liouville"\n'
        "gamma = 1.4\n"
        "seed = 3\n"
        "[weights]\n"
        "a1 = 1.2\n"
        "a2 = 1.2\n"
        "a3 = 1.3\n"
        "[grid]\n"
        "levels = [0, 1]\n"
        "R = 8.0\n"
    )
    config = load_run_config(path, {"seed": 11, "n_samples": None})
    assert config.seed == 11
    assert config.levels == (0, 1)
    assert config.R == 8.0
    assert config.weights["a3"] == 1.3


def test_load_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(TODA))
    assert load_run_config(path).kind == "toda"


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.toml")
    broken = tmp_path / "broken.toml"
    broken.write_text("gamma = \n")
    with pytest.raises(ConfigError):
        load_run_config(broken)


def test_overrides_without_file():
    config = load_run_config(None, {"kind": "liouville", "gamma": 1.4, "weights": LIOUVILLE["weights"]})
    assert config.kind == "liouville"
