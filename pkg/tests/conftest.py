import pytest

ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion.

    Usage: ``with acceptance(3, "title"): ...``.  The line is printed when
    the block exits and repeated in the terminal summary.
    """
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    class _Record:
        def __init__(self, number, title):
            self.number, self.title, self.detail = number, title, ""

        def __enter__(self):
            return self

        def __exit__(self, kind, exc, tb):
            status = "PASS" if kind is None else "FAIL"
            line = f"criterion {self.number}: {status} {self.title}"
            if self.detail:
                line += f" ({self.detail})"
            if kind is not None:
                line += f" [{kind.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}]"
            lines.append(line)
            print(line)
            return False

    return _Record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
