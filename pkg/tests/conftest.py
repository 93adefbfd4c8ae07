import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

# derandomized so that repeated runs exercise the same examples
settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repo")


def pytest_terminal_summary(terminalreporter):
    from acceptance_record import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
