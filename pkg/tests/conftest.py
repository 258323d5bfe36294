"""Collects acceptance-criterion outcomes and prints them after the run."""

from __future__ import annotations

import pytest

CRITERIA = {
    1: "gradient suite",
    2: "oracle equivalence",
    3: "ROUGE correctness",
    4: "overfit test",
    5: "architecture comparison",
    6: "attention invariants",
    7: "determinism",
    8: "LEAD pipeline check",
}

_results: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """``criterion(n, passed, detail)`` records one acceptance outcome."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _results[number] = (bool(passed), detail)
        print(f"criterion {number} ({CRITERIA[number]}): {'PASS' if passed else 'FAIL'}: {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title in CRITERIA.items():
        if number in _results:
            passed, detail = _results[number]
            status = "PASS" if passed else "FAIL"
        else:
            status, detail = "NOT RUN", "no result recorded"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
