import os

import pytest
from hypothesis import settings

from jacquet_o2 import harness as hs

# numba compiles on first call; wall-clock deadlines would measure that
settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """Reuse $JACQUET_O2_CACHE when set, else a throwaway directory."""
    env = os.environ.get("JACQUET_O2_CACHE")
    return env if env else str(tmp_path_factory.mktemp("cache"))


@pytest.fixture(scope="session")
def session3(cache_dir):
    return hs.Session(3, 1, cache_dir)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance PASS/FAIL lines, xfailed tests included."""
    lines = []
    for key in ("passed", "failed", "xfailed", "xpassed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when == "call":
                lines += [ln for ln in rep.capstdout.splitlines()
                          if ln.startswith(("[PASS] criterion", "[FAIL] criterion"))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in sorted(lines, key=lambda s: s.split("criterion ")[1]):
            terminalreporter.write_line(ln)
