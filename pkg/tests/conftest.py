import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_channel(rng, in_dim, out_dim, sparse=False):
    m = rng.dirichlet(np.ones(out_dim), size=in_dim).T
    if sparse:
        m = np.where(rng.random(m.shape) < 0.3, 0.0, m)
        m[rng.integers(out_dim), :] += 1e-3
        m /= m.sum(axis=0)
    return m


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
