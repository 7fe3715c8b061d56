from __future__ import annotations

from pathlib import Path

import pytest

from abdico.synthetic import data_dir

_ACCEPTANCE: list[tuple[str, str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion, description): exit criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        crit, desc = marker.args
        _ACCEPTANCE.append((crit, item.name, desc, "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, name, desc, status in _ACCEPTANCE:
        terminalreporter.write_line(f"{status} {crit} {desc} [{name}]")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return data_dir()
