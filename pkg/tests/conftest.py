import json
import os
import time

import pytest
from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=40, derandomize=True)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "suite"))

SUITE_BUDGET_S = 60.0

# One pytest session per process, so plain module state is enough.
_acceptance: dict = {}
_invariants = {"total": 0, "failed": []}
_start = [0.0]


def pytest_sessionstart(session):
    _start[0] = time.perf_counter()


@pytest.fixture
def record_criterion():
    """Store ``(title, passed, detail)`` under a criterion number for the summary."""

    def record(number, title, passed, detail):
        _acceptance[number] = (title, bool(passed), detail)

    return record


def pytest_runtest_logreport(report):
    if "invariant" not in report.keywords:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _invariants["total"] += 1
        if report.failed:
            _invariants["failed"].append(report.nodeid)


def _suite_result():
    elapsed = time.perf_counter() - _start[0]
    if _invariants["total"] == 0:
        return None, elapsed
    return (not _invariants["failed"] and elapsed <= SUITE_BUDGET_S), elapsed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    passed10, elapsed = _suite_result()
    if not _acceptance and passed10 is None:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, ok, detail = _acceptance[number]
        tr.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    if passed10 is not None:
        total, failed = _invariants["total"], _invariants["failed"]
        detail = (f"{total - len(failed)}/{total} invariant tests passed, "
                  f"suite ran {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")
        tr.write_line(f"criterion 10 {'PASS' if passed10 else 'FAIL'}  invariant suites and runtime: {detail}")
        for nodeid in failed:
            tr.write_line(f"    failing invariant: {nodeid}")
    path = os.environ.get("ADSORB_FRAC_SUMMARY")
    if path:
        with open(path, "w") as fh:
            json.dump({"elapsed": elapsed, "invariants": _invariants,
                       "acceptance": {str(k): v for k, v in _acceptance.items()}}, fh)


def pytest_sessionfinish(session, exitstatus):
    passed10, _ = _suite_result()
    if passed10 is False and session.exitstatus == 0:
        session.exitstatus = 1
