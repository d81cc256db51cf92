import pytest

from fdaflock import FlockParams
from fdaflock.sim import ScenarioConfig


@pytest.fixture
def short_config():
    # 5 s keeps the multi-run tests quick
    return ScenarioConfig(params=FlockParams(T=5.0))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for tag, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {tag}  [{detail}]")
