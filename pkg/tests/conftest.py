import numpy as np
import pytest

from klmmse.gaussian_core import GaussianDist, KlBall, SpdMatrix, toeplitz_exp_cov


@pytest.fixture
def toeplitz10():
    return toeplitz_exp_cov(10, 0.9)


@pytest.fixture
def toeplitz_ball(toeplitz10):
    return KlBall(GaussianDist.centered(toeplitz10), 2.0)


def random_spd(rng, k, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    vals = np.geomspace(1.0, cond, k) * rng.uniform(0.5, 2.0)
    return SpdMatrix((q * vals) @ q.T)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
