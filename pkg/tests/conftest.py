import functools

import pytest

from wplab.fuchsian import FNPoint
from wplab.teich import distance_to_stratum


@functools.lru_cache(maxsize=None)
def _stratum(ell: float, tau: float):
    return distance_to_stratum(FNPoint(ell, tau), max_len=6)


@pytest.fixture(scope="session")
def stratum():
    """Cached distance to the stratum; each evaluation takes up to a minute and a half."""
    return lambda ell, tau=0.0: _stratum(float(ell), float(tau))


# -- acceptance summary -------------------------------------------------------------

_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    _CRITERIA.setdefault(mark.args[0], []).append((item.name, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        runs = _CRITERIA[k]
        ok = all(passed for _, passed, _ in runs)
        parts = [f"{name}: {'ok' if passed else 'FAILED'}" + (f" ({d})" if d else "")
                 for name, passed, d in runs]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  " + " | ".join(parts))


@pytest.fixture
def detail(record_property):
    """Attach a short measurement string to the acceptance summary line."""
    return lambda text: record_property("detail", text)
