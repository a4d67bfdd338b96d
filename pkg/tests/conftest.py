import numpy as np
import pytest

from bosefinetti.operators import swap

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def random_hermitian(rng, k, complex_=True):
    a = rng.normal(size=(k, k))
    if complex_:
        a = a + 1j * rng.normal(size=(k, k))
    return (a + a.conj().T) / 2


def random_swap_symmetric(rng, d, complex_=True):
    v = random_hermitian(rng, (d + 1) ** 2, complex_)
    s = swap(d)
    return (v + s @ v @ s) / 2


def random_density(rng, k):
    a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def record_criterion():
    def record(name: str, passed: bool, detail: str = ""):
        ACCEPTANCE_RESULTS.append((name, bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
