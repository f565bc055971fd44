import pytest

GATE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[GATE] = []


@pytest.fixture
def gate(request):
    """Record one acceptance line; the summary prints them even when output is captured."""
    def record(number, name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {name}: {detail}"
        request.config.stash[GATE].append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(GATE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
