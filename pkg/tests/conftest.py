import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# name -> (p, modulus); all primitive
SMALL_FIELDS = {
    "GF2": (2, (1, 1)),
    "GF4": (2, (1, 1, 1)),
    "GF8": (2, (1, 1, 0, 1)),
    "GF16": (2, (1, 1, 0, 0, 1)),
    "GF3": (3, (1, 1)),
    "GF9": (3, (2, 2, 1)),
    "GF5": (5, (2, 1)),
    "GF25": (5, (2, 1, 1)),
    "GF7": (7, (2, 1)),
}

_acceptance = {}


@pytest.fixture(scope="session")
def gf():
    from superreg.finite_field import make_field

    cache = {}

    def get(name):
        if name not in cache:
            p, mod = SMALL_FIELDS[name]
            cache[name] = make_field(p, mod)
        return cache[name]

    return get


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid] = report.outcome
    elif "test_acceptance" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in sorted(_acceptance.items()):
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
