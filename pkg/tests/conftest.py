from fractions import Fraction

import pytest
from hypothesis import settings

from staircase import Affine, ConstructionParams, ExplicitList, build_stage_table

# numba compiles on first call, which would trip per-example deadlines
settings.register_profile("default", deadline=None)
settings.load_profile("default")

TOL = Fraction(1, 2**20)


@pytest.fixture
def t222():
    return build_stage_table(ConstructionParams(1, ExplicitList((2, 2, 2))), 4)


@pytest.fixture
def t23():
    return build_stage_table(ConstructionParams(1, ExplicitList((2, 3))), 3)


@pytest.fixture
def affine():
    return build_stage_table(ConstructionParams(1, Affine(1, 1)), 5)


_VERDICTS: list = []


@pytest.fixture
def verdict(capsys):
    """Record and print one PASS/FAIL line per acceptance criterion, then assert."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        _VERDICTS.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
