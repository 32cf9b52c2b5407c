import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    state = {}

    def report(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
        state["line"] = line
        request.config.stash[_LINES].append(line)
        print(line)
        assert ok, line

    yield report
    if "line" not in state:
        request.config.stash[_LINES].append(f"FAIL {request.node.name}: did not complete")


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("criterion")[-1]):
            terminalreporter.write_line(line)
