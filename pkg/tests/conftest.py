import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lidar_cover import build_coverage_graph, toy_instance  # noqa: E402


@pytest.fixture(scope="session")
def toy_graphs():
    return {n: build_coverage_graph(toy_instance(n)) for n in range(1, 12)}


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.TITLES):
        if n in module.RESULTS:
            status = "PASS" if module.RESULTS[n] else "FAIL"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"criterion {n}: {status}  {module.TITLES[n]}")
