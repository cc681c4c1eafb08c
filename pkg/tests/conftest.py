import numpy as np
import pytest

from isac_hbf import SystemConfig, make_spec
from isac_hbf.channel import ChannelRealization


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    """Reduced scenario that designs in well under a second."""
    return SystemConfig(n_tx=16, n_rx=4, n_trials=3)


@pytest.fixture
def spec8():
    return make_spec(8, [-30.0, 20.0], sigma_theta=5.0, grid_step_deg=10.0)


def random_cm(rng, n_tx, m_t):
    return np.exp(2j * np.pi * rng.random((n_tx, m_t))) / np.sqrt(n_tx)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_channel(rng, n_rx, n_tx, rank=None):
    H = crandn(rng, n_rx, n_tx)
    if rank is not None:
        H = crandn(rng, n_rx, rank) @ crandn(rng, rank, n_tx)
    return ChannelRealization.from_matrix(H)


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE: dict[int, str] = {}
ACCEPTANCE_NOTES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
    for note in ACCEPTANCE_NOTES:
        terminalreporter.write_line(f"  note: {note}")
