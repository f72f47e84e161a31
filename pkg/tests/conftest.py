import sys

import pytest
from hypothesis import settings

# the first call of each compiled kernel pays for JIT compilation
settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the kernels once so timing-sensitive tests measure steady state."""
    from groovegait.sim import Scenario, run
    from groovegait.substrate import WorldMap

    run(Scenario(WorldMap.uniform(10.0), cycles=2))
