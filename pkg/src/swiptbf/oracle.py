"""Brute-force beam-grid oracle for two-antenna, single-ER instances.

Independent cross-check for the optimizer: it never touches the convex
machinery and evaluates the SINR/secrecy/energy formulas through its own
scalar reduction.  Beams are parameterized by polar angle and relative
phase (global phases drop out of every metric) and a power split, and the
search couples a dominance-pruned direction frontier for each beam with a
dense split grid, followed by shrinking-window local refinement.  The
effective resolution is n_bins^2 * n_split exact evaluations on top of an
n_angle * n_phase direction table per beam, well past a plain 100^3 grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError
from .model import ChannelSet, SystemParams

__all__ = ["OracleConfig", "OracleResult", "max_energy", "max_secrecy_rate"]


@dataclass(frozen=True)
class OracleConfig:
    n_angle: int = 721
    n_phase: int = 721
    n_bins: int = 400
    n_split: int = 401
    refine_steps: int = 9
    refine_passes: int = 40


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    energy: float
    secrecy_rate: float
    split: float


def _reduce(ch: ChannelSet):
    """Rotate the IR channel onto axis one; phases drop out of the gains."""
    h = ch.h
    g = ch.g[0]
    hn = float(np.linalg.norm(h))
    u1 = h / hn
    u2 = np.array([-np.conj(h[1]), np.conj(h[0])], dtype=np.complex128) / hn
    g1 = abs(np.vdot(u1, g)) ** 2
    g2 = abs(np.vdot(u2, g)) ** 2
    return hn * hn, g1, g2


def _tables(params: SystemParams, ch: ChannelSet, cfg: OracleConfig):
    ch.validate_against(params)
    if params.m != 2 or params.k != 1:
        raise ValidationError("the brute-force oracle covers M=2, K=1 only")
    h1, g1, g2 = _reduce(ch)
    theta = np.linspace(0.0, 0.5 * math.pi, cfg.n_angle)
    cosphi = np.linspace(-1.0, 1.0, cfg.n_phase)
    a, b = kernels.beam_tables(theta, cosphi, h1, g1, g2)
    av, bv, iv = kernels.prune_frontier(a, b, cfg.n_bins, keep_max_a=True)
    aw, bw, iw = kernels.prune_frontier(a, b, cfg.n_bins, keep_max_a=False)

    def angles(flat_idx):
        return (
            theta[flat_idx // cfg.n_phase],
            cosphi[flat_idx % cfg.n_phase],
        )

    return h1, g1, g2, (av, bv, iv), (aw, bw, iw), angles


def _refine_windows():
    """Initial refinement window: 4% of each coordinate range, wide enough
    to absorb the frontier binning error around the coarse winner."""
    return [0.04 * 0.5 * math.pi, 0.04 * 2.0, 0.04 * 0.5 * math.pi, 0.04 * 2.0, 0.04]


def max_energy(params: SystemParams, ch: ChannelSet, cfg: OracleConfig | None = None) -> OracleResult:
    """Best weighted harvested energy subject to the secrecy target, by
    exhaustive search over rank-one beam pairs (information beam plus one
    energy beam)."""
    cfg = cfg or OracleConfig()
    h1, g1, g2, vfront, wfront, angles = _tables(params, ch, cfg)
    av, bv, iv = vfront
    aw, bw, iw = wfront
    t_grid = np.linspace(0.0, 1.0, cfg.n_split)
    two_r = math.pow(2.0, params.r_bar)
    zeta_mu = params.zeta * float(params.mu[0])
    best_e, e_idx, _, _ = kernels.split_search(
        av, bv, aw, bw, t_grid,
        params.p_bar, params.sigma0_sq, float(params.sigma_sq[0]), two_r, zeta_mu,
    )
    if not np.isfinite(best_e):
        return OracleResult(feasible=False, energy=-math.inf, secrecy_rate=-math.inf, split=math.nan)
    tv, cv = angles(iv[e_idx[0]])
    tw, cw = angles(iw[e_idx[1]])
    t0 = t_grid[e_idx[2]]
    center = [tv, cv, tw, cw, t0]
    widths = _refine_windows()
    refined, point = kernels.refine_beams(
        h1, g1, g2, center, widths,
        params.p_bar, params.sigma0_sq, float(params.sigma_sq[0]), two_r, zeta_mu,
        n_steps=cfg.refine_steps, n_passes=cfg.refine_passes, maximize_energy=True,
    )
    energy = max(best_e, refined)
    return OracleResult(
        feasible=True,
        energy=float(energy),
        secrecy_rate=params.r_bar,
        split=float(point[4]),
    )


def max_secrecy_rate(params: SystemParams, ch: ChannelSet, cfg: OracleConfig | None = None) -> float:
    """Largest achievable secrecy rate over the same beam parameterization
    (the energy objective is ignored)."""
    cfg = cfg or OracleConfig()
    h1, g1, g2, vfront, wfront, angles = _tables(params, ch, cfg)
    av, bv, iv = vfront
    aw, bw, iw = wfront
    t_grid = np.linspace(0.0, 1.0, cfg.n_split)
    _, _, best_ratio, r_idx = kernels.split_search(
        av, bv, aw, bw, t_grid,
        params.p_bar, params.sigma0_sq, float(params.sigma_sq[0]),
        math.inf, params.zeta * float(params.mu[0]),
    )
    tv, cv = angles(iv[r_idx[0]])
    tw, cw = angles(iw[r_idx[1]])
    center = [tv, cv, tw, cw, t_grid[r_idx[2]]]
    widths = _refine_windows()
    ratio, _ = kernels.refine_beams(
        h1, g1, g2, center, widths,
        params.p_bar, params.sigma0_sq, float(params.sigma_sq[0]),
        math.inf, 1.0,
        n_steps=cfg.refine_steps, n_passes=cfg.refine_passes, maximize_energy=False,
    )
    return math.log2(max(ratio, best_ratio))
