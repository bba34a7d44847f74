import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rocp.series import ScoreRecord

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_records(scores, sigmas=None, h=1, start=1):
    sigmas = [None] * len(scores) if sigmas is None else sigmas
    return [ScoreRecord(start + i, h, float(s), None if g is None else float(g))
            for i, (s, g) in enumerate(zip(scores, sigmas))]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
