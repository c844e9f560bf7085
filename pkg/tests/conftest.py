import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quasilorentz.schemes import packaged

settings.register_profile("default", max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

N_CRITERIA = 11


@pytest.fixture(scope="session")
def z2():
    return packaged("Z2")


@pytest.fixture(scope="session")
def penrose():
    return packaged("penrose")


@pytest.fixture(scope="session")
def fibonacci():
    return packaged("fibonacci")


@pytest.fixture(scope="session")
def honeycomb():
    return packaged("honeycomb")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """record(k, ok, detail): one summary line per acceptance criterion."""
    store = request.config.stash.setdefault(_KEY, {})

    def record(k, ok, detail):
        store.setdefault(k, []).append((bool(ok), detail))
        print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


_KEY = pytest.StashKey[dict]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_KEY, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        if k in store:
            ok = all(o for o, _ in store[k])
            detail = " | ".join(d for _, d in store[k])
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN")
