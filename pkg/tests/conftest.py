import numpy as np
import pytest

from eegwgan.data import make_toy_dataset

ACCEPTANCE_RESULTS = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_toy():
    return make_toy_dataset(n_per_class=40, seg_len=32, f0=2, f1=6, noise_std=0.1, seed=3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
