import warnings

import pytest

from starkkerr import presets
from starkkerr.fockspace import DispersiveRegimeWarning


@pytest.fixture
def ba_device():
    return presets.ba_pair_device()


@pytest.fixture
def cb_pair_device():
    return presets.cb_pair_device()


@pytest.fixture
def quiet_dispersive():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DispersiveRegimeWarning)
        yield


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the terminal summary lists them all."""
    store = request.config.stash.setdefault(_CRITERIA, {})

    def record(number: int, ok: bool, detail: str, seconds: float):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} [{seconds:.2f} s]"
        store[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for k in sorted(store):
            terminalreporter.write_line(store[k])
