import numpy as np
import pytest


def rand_complex(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def rand_hermitian(rng, n):
    G = rand_complex(rng, n)
    return (G + G.conj().T) / 2


def rand_psd(rng, n):
    G = rand_complex(rng, n)
    return G.conj().T @ G


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_SESSION = {}


def pytest_sessionstart(session):
    import time
    _SESSION["start"] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    # tests marked run_last (the suite-runtime criterion) go to the very end
    last = [it for it in items if it.get_closest_marker("run_last")]
    items[:] = [it for it in items if not it.get_closest_marker("run_last")] + last


def pytest_configure(config):
    config.addinivalue_line("markers", "run_last: execute after every other test")


@pytest.fixture
def session_elapsed():
    import time
    return lambda: time.perf_counter() - _SESSION.get("start", time.perf_counter())


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line for an acceptance criterion, then assert it."""
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit
