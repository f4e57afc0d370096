import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# PASS/FAIL lines from the acceptance module, repeated in the terminal summary
# so they show up even when output capture is on.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
