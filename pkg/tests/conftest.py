import numpy as np
import pytest

from stretchyreg.datasets import find_prostate, load_prostate

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    cid, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        prev = _ACCEPTANCE.get(cid)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[cid] = (status, text)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda c: int(c[1:])):
        status, text = _ACCEPTANCE[cid]
        terminalreporter.write_line(f"{status:4s} {cid:>3s}  {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(20140801)


@pytest.fixture(scope="session")
def prostate():
    if find_prostate() is None:
        pytest.skip("prostate.data not available; set STRETCHYREG_PROSTATE to run")
    return load_prostate()


def prostate_like(seed=0):
    """97 x 8 stand-in with the prostate columns' rough scales (67 train rows)."""
    r = np.random.default_rng(seed)
    M = 97
    X = np.column_stack([
        r.normal(1.35, 1.18, M), r.normal(3.6, 0.43, M), r.normal(63.9, 7.4, M),
        r.normal(0.1, 1.45, M), r.integers(0, 2, M).astype(float),
        r.normal(-0.18, 1.4, M), r.integers(6, 10, M).astype(float),
        np.clip(r.normal(24, 28, M), 0, 100),
    ])
    y = 0.7 * X[:, 0] + 0.3 * X[:, 1] + 0.5 * X[:, 4] + r.normal(0, 0.7, M)
    return X, y, np.arange(M) < 67
