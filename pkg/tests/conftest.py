"""Shared fixtures: memoized preset runs for the acceptance suite."""

import time

import pytest

from scmmi.scenarios import get_preset
from scmmi.solver import run

# one "[PASS]/[FAIL] criterion N: ..." line per acceptance criterion,
# echoed after the run so capture cannot swallow them
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class PresetRuns:
    """Runs each scenario preset once per session, on first use."""

    def __init__(self):
        self._cache = {}

    def get(self, name, limiter=False):
        key = (name, limiter)
        if key not in self._cache:
            preset = get_preset(name)
            cfg = preset.config
            if limiter:
                cfg = cfg.with_(mi_limiter_enabled=True)
            t0 = time.perf_counter()
            rec = run(cfg, preset.duration)
            elapsed = time.perf_counter() - t0
            self._cache[key] = (preset, rec, elapsed)
        return self._cache[key]


@pytest.fixture(scope="session")
def preset_runs():
    return PresetRuns()
