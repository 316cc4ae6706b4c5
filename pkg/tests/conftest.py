import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "errorlab",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("errorlab")

# Acceptance-criterion verdict lines, one per criterion, echoed after the run.
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session", autouse=True)
def _isolated_cache(tmp_path_factory):
    """Redirect the sieve cache so tests never touch the user's data dir."""
    old = os.environ.get("ERRORLAB_CACHE_DIR")
    os.environ["ERRORLAB_CACHE_DIR"] = str(tmp_path_factory.mktemp("sieve-cache"))
    yield
    if old is None:
        os.environ.pop("ERRORLAB_CACHE_DIR", None)
    else:
        os.environ["ERRORLAB_CACHE_DIR"] = old


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
