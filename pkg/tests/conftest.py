from importlib.resources import files

import pytest
from hypothesis import settings

from valuedisj.model import load_instance, parse_blocks

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FIXTURES = files("valuedisj") / "fixtures"


def fixture_path(name: str):
    return FIXTURES / name


def fixture(name: str):
    return load_instance(FIXTURES / name)


def fixture_blocks(name: str):
    return parse_blocks((FIXTURES / name).read_text())


@pytest.fixture
def ex1():
    return fixture("ex1.mip")


@pytest.fixture
def ex3():
    return fixture("ex3.mip")


@pytest.fixture
def ex5():
    return fixture("ex5.mip")


# ------------------------------------------------ acceptance summary lines

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    num = dict(report.user_properties).get("criterion")
    if num is None:
        return
    title = dict(report.user_properties).get("title", "")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[num] = ("PASS" if report.passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        verdict, title = _ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {title}")
