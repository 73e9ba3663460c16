import pytest

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def record(request):
    """Record one acceptance line: ``record(number, title, ok, **detail)``."""

    def _record(number: int, title: str, ok: bool, **detail) -> bool:
        extra = ", ".join(f"{k}={v}" for k, v in detail.items())
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} {title}" + (f" ({extra})" if extra else "")
        request.config.stash[_LINES_KEY].append((number, line))
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
