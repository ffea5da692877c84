import functools

import pytest

from hkverify.suite import standard_model


@functools.lru_cache(maxsize=None)
def model(b: int, m: int):
    return standard_model(b, m)


@pytest.fixture
def m41():
    return model(4, 1)


@pytest.fixture
def m52():
    return model(5, 2)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
