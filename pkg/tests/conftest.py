import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bcspectra.hamiltonian import new_hamiltonian
from bcspectra.models import LinearTwoBandModel, QuadraticModel

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def quadratic():
    return QuadraticModel(1.0).hamiltonian()


@pytest.fixture
def linear():
    return LinearTwoBandModel(1.0, 1.0).hamiltonian()


@pytest.fixture
def quartic():
    return new_hamiltonian(1, [4], {2: 1.0, 4: 1.0})


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, title = mark.args
    failed = report.failed or (report.when == "call" and not report.passed)
    if report.when == "call" or failed:
        _ACCEPTANCE[n] = (title, _ACCEPTANCE.get(n, (title, True))[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}")
