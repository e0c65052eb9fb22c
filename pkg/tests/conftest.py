import numpy as np
import pytest

from xaskit import EnergyGrid, K_CONV, Spectrum


def arctan_edge(center=8979.0, width=2.0, lo=8879.0, hi=9379.0, step=1.0,
                scale=1.0, offset=0.0):
    """Symmetric arctan absorption edge on a uniform grid."""
    e = np.arange(lo, hi + 0.5 * step, step)
    mu = offset + scale * (0.5 + (1.0 / np.pi) * np.arctan((e - center) / width))
    return Spectrum(grid=EnergyGrid(e), mu=mu)


def synthetic_exafs(e0=9000.0, k_start=1.0, k_max=12.0, n_post=600,
                    osc_amp=0.05, r0=2.5):
    """Pre-edge line + smooth cubic post-edge + sin(2*k*r0)/k oscillation.

    Post-edge sampling starts at k_start (the near-edge region between e0
    and k_start carries no samples, as in real scans).  Returns
    (spectrum, truth) where truth holds the exact background, oscillation
    and edge step used to build the data.
    """
    e_pre = np.arange(8800.0, e0, 2.0)
    k = np.linspace(k_start, k_max, n_post)
    e_post = e0 + k * k / K_CONV
    pre_line = lambda e: 0.1 + 1e-5 * (e - e0)
    x = e_post - e0
    mu0 = 1.1 - 3e-4 * x + 2e-7 * x ** 2 - 5e-11 * x ** 3
    osc = osc_amp * np.sin(2.0 * k * r0) / k
    e = np.concatenate([e_pre, e_post])
    mu = np.concatenate([pre_line(e_pre), mu0 + osc])
    spectrum = Spectrum(grid=EnergyGrid(e), mu=mu)
    truth = {
        "e0": e0, "k": k, "mu0": mu0, "osc": osc,
        "edge_step": 1.1 - pre_line(e0),
        "pre_line": pre_line,
    }
    return spectrum, truth


@pytest.fixture
def edge_spectrum():
    return arctan_edge()


@pytest.fixture
def exafs_spectrum():
    return synthetic_exafs()
