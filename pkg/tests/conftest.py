"""Shared strategies and the acceptance-criteria summary section."""

import math

from hypothesis import strategies as st

from topometric.geometry import Pose2, RelativeMotion

# One line per acceptance criterion, echoed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, ok: bool, detail: str) -> None:
    """Print and register a pass/fail line, then enforce it."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


finite_angles = st.floats(
    min_value=-4.0 * math.pi, max_value=4.0 * math.pi, allow_nan=False, allow_infinity=False
)

coords = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def poses(draw):
    return Pose2(draw(coords), draw(coords), draw(finite_angles))


@st.composite
def relative_motions(draw):
    small = st.floats(min_value=-100.0, max_value=100.0, allow_nan=False, allow_infinity=False)
    return RelativeMotion.from_planar(draw(small), draw(small), draw(finite_angles))
