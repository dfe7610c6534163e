"""Shared helpers: the reference system setup and channel sampling."""

import numpy as np
import pytest

from swiptbf.model import ChannelGenSpec, ChannelSet, SystemParams, generate_channels

# reference simulation setup: 4 Tx antennas, 3 ERs at -30 dB path gain,
# IR at -70 dB, 1 W budget, -50 dBm noise everywhere, zeta = 0.5
REF_RHO_H_SQ = 1e-7
REF_RHO_G_SQ = 1e-3
REF_SIGMA_SQ = 1e-8


def make_params(m=4, k=3, p_bar=1.0, r_bar=0.0, zeta=0.5, mu=None,
                sigma0_sq=REF_SIGMA_SQ, sigma_sq=None):
    return SystemParams(
        m=m,
        k=k,
        p_bar=p_bar,
        sigma0_sq=sigma0_sq,
        sigma_sq=np.full(k, REF_SIGMA_SQ) if sigma_sq is None else np.asarray(sigma_sq),
        zeta=zeta,
        mu=np.ones(k) if mu is None else np.asarray(mu),
        r_bar=r_bar,
    )


def make_gen_spec(k=3, seed=0):
    return ChannelGenSpec(
        rho_h_sq=REF_RHO_H_SQ,
        rho_g_sq=np.full(k, REF_RHO_G_SQ),
        seed=seed,
    )


def draw_channels(params, seed=0, trial=None):
    return generate_channels(params, make_gen_spec(k=params.k, seed=seed), trial=trial)


def orthogonal_channels(sigma=None):
    """M=2, K=1 with h = e1, g = e2: every formula collapses to hand math."""
    h = np.array([1.0, 0.0], dtype=complex)
    g = np.array([[0.0, 1.0]], dtype=complex)
    return ChannelSet(h=h, g=g)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
