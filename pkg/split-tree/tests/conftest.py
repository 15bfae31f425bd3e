import dataclasses
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from construction import run  # noqa: E402
from scenarios import get_scenario, scenario_roster  # noqa: E402
from trace_store import TraceDoc  # noqa: E402


def run_scenario(name, **overrides):
    spec = get_scenario(name)
    cfg = dataclasses.replace(spec.config, **overrides) if overrides else spec.config
    return run(cfg, scenario_roster(spec))


@pytest.fixture(scope="session")
def a1_trace():
    return run_scenario("a1")


@pytest.fixture(scope="session")
def a2_trace():
    return run_scenario("a2")


@pytest.fixture(scope="session")
def switch2_trace():
    return run_scenario("switch2")


@pytest.fixture(scope="session")
def gen3_trace():
    return run_scenario("gen3")


@pytest.fixture
def doc_of():
    return lambda trace: TraceDoc.from_records(trace.records())
