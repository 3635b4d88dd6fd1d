import os

import pytest
from hypothesis import HealthCheck, settings

from flashlab.laws import PointMass
from flashlab.market_models import (
    Constant,
    Deterministic,
    JumpSpec,
    ModelSpec,
    PathGenerator,
    Predictability,
    TimeGrid,
)

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def flat_jump_model(size=0.5, t=0.5, x0=10.0, predictability=Predictability.FULL, law=None):
    law = law if law is not None else PointMass(size)
    return ModelSpec(x0, Constant(), (JumpSpec(Deterministic(t), law, predictability, "J"),))


@pytest.fixture
def grid16():
    return TimeGrid(16, 1.0)


@pytest.fixture
def flat_full(grid16):
    spec = flat_jump_model()
    return spec, PathGenerator(spec, grid16)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(verdicts):
        terminalreporter.write_line(verdicts[n])
