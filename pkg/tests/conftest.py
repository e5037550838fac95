from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from calbehav.pipeline import run_bundle  # noqa: E402
from calbehav.synth import worked_example_fixture, generalization_fixture  # noqa: E402


@pytest.fixture(scope="session")
def worked_example():
    return worked_example_fixture()


@pytest.fixture(scope="session")
def worked_example_instances(worked_example):
    return run_bundle(worked_example.bundle).instances


@pytest.fixture(scope="session")
def generalization():
    return generalization_fixture()


_CRITERIA: dict[int, tuple[bool, str]] = {}


class _Criterion:
    def __init__(self, number: int, title: str) -> None:
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        note = self.detail if ok else f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        _CRITERIA[self.number] = (ok, f"{self.title} ({note})" if note else self.title)
        line = f"criterion {self.number:>2}: {'PASS' if ok else 'FAIL'}  {_CRITERIA[self.number][1]}"
        print(line)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, text = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}")
