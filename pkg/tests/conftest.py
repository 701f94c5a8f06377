from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"
TICK_FIXTURE = DATA / "INFY_synthetic.csv"

_acceptance_lines: list[str] = []


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for an acceptance criterion."""

    def record(number, name, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        _acceptance_lines.append(f"[{status}] criterion {number}: {name}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def spectra_close(a, b, rtol=1e-9):
    """Per-bin agreement relative to the larger spectrum's peak magnitude."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return bool(np.all(np.abs(a - b) <= rtol * scale))


@pytest.fixture
def tick_fixture():
    return TICK_FIXTURE
