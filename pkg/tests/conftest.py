# tests/conftest.py
import os

from hypothesis import settings
import pytest

from app.exact_formulas import ThreePointInput
from app.root_system import TodaParams, WeightVector

# Upsilon quadratures dominate the runtime of the property tests
settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def pytest_collection_modifyitems(config, items):
    if os.getenv("TODA_CFT_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set TODA_CFT_SLOW=1 to run Monte-Carlo acceptance runs")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def params():
    return TodaParams(1.0)


@pytest.fixture
def generic_input(params):
    """Generic weights: no l or Gamma factor of the structure constants near an integer."""
    return ThreePointInput(WeightVector.from_omegas(0.31, 0.47), 0.73, WeightVector.from_omegas(0.22, 0.58), params)


@pytest.fixture
def no_logging(monkeypatch):
    """Keep CLI tests from creating log files in the repository."""
    monkeypatch.setattr("main.setup_logging", lambda: None)
