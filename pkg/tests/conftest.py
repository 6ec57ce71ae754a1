import numpy as np
import pytest


def random_hurwitz(rng, d, margin=(0.1, 1.0)):
    """Random dense matrix shifted so its spectral abscissa is -U(margin)."""
    a = rng.standard_normal((d, d))
    shift = np.linalg.eigvals(a).real.max() + rng.uniform(*margin)
    return a - shift * np.eye(d)


def random_psd(rng, d, rank=None):
    b = rng.standard_normal((d, rank or d))
    return b @ b.T


@pytest.fixture
def rng():
    return np.random.default_rng(20201015)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(test_acceptance.REPORT):
        terminalreporter.write_line(test_acceptance.REPORT[number])
