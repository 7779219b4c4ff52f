from fractions import Fraction

import pytest

from laminate_forge.staircase3d import build_sequence_3d

F = Fraction


@pytest.fixture(scope="session")
def stages3d():
    """Exact 3-D stages 1..6, built once per session."""
    return build_sequence_3d(6, 0.1)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
