import pytest

from geophase.core import LinearImpact, MarketParams, SystemState


@pytest.fixture
def linear():
    return MarketParams(impact=LinearImpact(0.1), s0=100.0)


@pytest.fixture
def origin():
    return SystemState(0.0, 100.0, 0.0)


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on its own."""
    def record(label: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((label, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
