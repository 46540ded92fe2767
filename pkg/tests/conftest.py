import json
import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = Path(__file__).parent / "golden" / "values.json"


@pytest.fixture(scope="session")
def golden():
    return json.loads(GOLDEN.read_text())


# --- acceptance reporting -------------------------------------------------
# Tests marked ``@pytest.mark.criterion(n, "title")`` are aggregated into one
# PASS/FAIL line per criterion in the terminal summary.

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "failed": []})
    if rep.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entry = _CRITERIA[n]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"{status} criterion {n}: {entry['title']}"
        if entry["failed"]:
            line += f"  [failing: {', '.join(entry['failed'])}]"
        terminalreporter.write_line(line)
