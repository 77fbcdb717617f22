import numpy as np
import pytest

from irs_secrecy.channel import (
    ChannelRealization, FadingConfig, derive_seed, fixed_geometry, make_rng, random_geometry, sample_channels,
)
from irs_secrecy.secrecy import ResourceAllocation


def manual_realization(g, h_direct, h_irs_user, h_eve_direct=None, h_eve_irs=None, noise=0.1):
    """Realization with hand-set links; geometry is a placeholder."""
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    h_direct = np.atleast_2d(np.asarray(h_direct, dtype=complex))
    h_irs_user = np.atleast_2d(np.asarray(h_irs_user, dtype=complex))
    M, N = g.shape
    h_eve_direct = np.zeros(M, complex) if h_eve_direct is None else np.asarray(h_eve_direct, complex)
    h_eve_irs = np.zeros(N, complex) if h_eve_irs is None else np.asarray(h_eve_irs, complex)
    return ChannelRealization(g, h_direct, h_irs_user, h_eve_direct, h_eve_irs,
                              fixed_geometry(h_direct.shape[0]), 0, noise)


def random_realization(seed, M=3, N=4, K=2, noise=1e-13):
    fading = FadingConfig(num_antennas=M, num_elements=N, noise_power=noise)
    geo = random_geometry(make_rng(derive_seed(seed, 0, 0)), K)
    return sample_channels(fading, geo, derive_seed(seed, 0, 1))


def random_allocation(rng, M, N, K, p_t=1.0):
    w = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
    return ResourceAllocation(w / np.linalg.norm(w), rng.dirichlet(np.ones(K)),
                              np.exp(1j * rng.uniform(0, 2 * np.pi, N)), p_t)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
