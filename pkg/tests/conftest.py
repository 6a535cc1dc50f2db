import pytest

_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """Record a named acceptance criterion outcome for the terminal summary."""

    def report(name: str, ok: bool, detail: str = ""):
        _CRITERIA[name] = (bool(ok), detail)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: (len(s.split()[0]), s)):
        ok, detail = _CRITERIA[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
