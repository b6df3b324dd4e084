import numpy as np
import pytest

D1 = np.array([[0.0], [1.0], [3.0], [7.0]])
D2 = np.array([[0.0, 0.0], [0.0, 1.0], [4.0, 0.0], [4.0, 1.0]])
D3 = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]])


def gaussian_blobs(seed: int = 0, n: int = 200) -> np.ndarray:
    """Seeded 2-D mixture of three unit-variance Gaussians."""
    g = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [6.0, 0.0], [3.0, 5.0]])
    which = np.arange(n) % 3
    return centers[which] + g.normal(size=(n, 2))


@pytest.fixture(scope="session")
def blobs():
    return gaussian_blobs()


_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    # one line per acceptance test, printed at the end of the session
    if report.when == "call" and "test_acceptance.py::" in report.nodeid:
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {name}")
