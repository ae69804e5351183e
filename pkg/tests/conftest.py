import pytest

_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def record_criterion(request):
    """Print and keep one PASS/FAIL line per acceptance criterion."""
    results = request.config.stash.setdefault(_RESULTS, {})

    def record(number, title, ok, detail=""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        results[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
