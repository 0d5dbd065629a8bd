import pytest

from branchwalk import build_bundle, load_scenario
from branchwalk.scenarios import BUNDLED


@pytest.fixture(scope="session")
def bundles():
    """All bundled scenarios, built once per test session."""
    return {name: build_bundle(load_scenario(name)) for name in BUNDLED}
