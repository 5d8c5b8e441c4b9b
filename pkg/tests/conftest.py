import pytest

# criterion id -> (passed, detail), filled by the acceptance suite
RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k[2:])):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{key:<5} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record():
    def _record(key, ok, detail=""):
        RESULTS[key] = (bool(ok), detail)
        print(f"{key} {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return _record
