import math

import pytest

from optgen.scenario import ScenarioConfig, prepare, snapshot

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def oat20():
    return prepare(ScenarioConfig(scenario="oat", N=20))


@pytest.fixture(scope="session")
def tat20():
    return prepare(ScenarioConfig(scenario="tat", N=20))


@pytest.fixture(scope="session")
def tat20_quarter(tat20):
    return snapshot(tat20, math.pi / 4)
