"""Closed-form low-complexity beam designs.

Scheme I nulls the information beam at every ER (v0 in the null space of
the stacked ER channels) and the single energy beam at the IR, so the
secrecy constraint is met with equality using the minimum information
power and everything left feeds the best null(h) energy direction.  Only
applicable when K < M.

Scheme II points the information beam straight along h (maximum ratio
transmission), keeps the energy beam in null(h), and optimizes the power
split: the feasible split set is located by a dense grid with bisection
refinement of its boundaries, and the paper-prescribed comparison of the
two directions' weighted ER gains picks the max-power or min-power end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateChannelError, InfeasibleTargetError, SchemeInapplicableError
from .linalg import hermitian_evd, svd_right_null
from .model import BeamformingSolution, ChannelSet, SystemParams, compute_energy

__all__ = [
    "SchemeIDesign",
    "SchemeIIDesign",
    "Scheme2Config",
    "scheme1",
    "scheme2",
    "scheme1_rate_ceiling",
    "scheme2_rate_ceiling",
    "null_h_energy_stage",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SchemeIDesign:
    null_basis: np.ndarray   # orthonormal basis of null(G), M x (M-K)
    p_info: float            # information-beam power
    v0: np.ndarray
    w1: np.ndarray | None
    energy: float            # weighted sum energy, equals psi~ * (P - p_info)

    def as_beams(self) -> BeamformingSolution:
        w = self.w1[:, None] if self.w1 is not None else np.zeros((self.v0.shape[0], 0))
        return BeamformingSolution(v0=self.v0, w=w, scheme_tag="sub1")


@dataclass(frozen=True)
class SchemeIIDesign:
    p_info: float
    p_min: float
    p_max: float
    branch: str              # "max_power" | "min_power"
    v0: np.ndarray
    w1: np.ndarray | None
    energy: float
    feasible_set_connected: bool

    def as_beams(self) -> BeamformingSolution:
        w = self.w1[:, None] if self.w1 is not None else np.zeros((self.v0.shape[0], 0))
        return BeamformingSolution(v0=self.v0, w=w, scheme_tag="sub2")


@dataclass(frozen=True)
class Scheme2Config:
    grid_points: int = 10_000
    boundary_tol: float = 1e-10  # relative to the power budget


def null_h_energy_stage(params: SystemParams, ch: ChannelSet):
    """Basis of null(h) and the best energy direction inside it.

    The projector T = I - h h^H / |h|^2 factors as X X^H with X the
    eigenvalue-one eigenvectors; the energy direction is the top
    eigenvector of the projected weight matrix sum_k mu_k zeta G_k~.
    """
    m = params.m
    h = ch.h
    t = np.eye(m, dtype=np.complex128) - np.outer(h, h.conj()) / float(
        np.linalg.norm(h) ** 2
    )
    evd = hermitian_evd(t)
    x_tilde = evd.eigenvectors[:, : m - 1]
    weights = np.zeros((m - 1, m - 1), dtype=np.complex128)
    for k in range(params.k):
        gk = ch.g[k]
        proj = x_tilde.conj().T @ np.outer(gk, gk.conj()) @ x_tilde
        weights += params.mu[k] * params.zeta * proj
    top = hermitian_evd((weights + weights.conj().T) / 2.0)
    psi_t = top.top_value
    eta_t = top.top_vector
    return x_tilde, psi_t, eta_t


def scheme1_rate_ceiling(params: SystemParams, ch: ChannelSet) -> float:
    """Largest target this scheme can meet: all power on the information
    beam inside null(G)."""
    vt = svd_right_null(ch.g_matrix())
    gain = float(np.linalg.norm(vt.basis.conj().T @ ch.h) ** 2)
    return math.log1p(params.p_bar * gain / params.sigma0_sq) / _LN2


def scheme1(params: SystemParams, ch: ChannelSet) -> SchemeIDesign:
    ch.validate_against(params)
    if params.k >= params.m:
        raise SchemeInapplicableError(
            f"scheme 1 needs K < M (null space of the ER channels), got K={params.k}, M={params.m}"
        )
    vt = svd_right_null(ch.g_matrix())
    eq_h = vt.basis.conj().T @ ch.h
    gain = float(np.linalg.norm(eq_h) ** 2)
    if gain <= (1e-14 * np.linalg.norm(ch.h)) ** 2:
        raise DegenerateChannelError(
            "IR channel is orthogonal to the ER null space; scheme 1 cannot serve it"
        )
    p_info = (math.pow(2.0, params.r_bar) - 1.0) * params.sigma0_sq / gain
    if p_info > params.p_bar * (1.0 + 1e-12):
        raise InfeasibleTargetError(
            f"scheme 1 cannot meet the target {params.r_bar} bits within the power budget",
            r_max=scheme1_rate_ceiling(params, ch),
        )
    p_info = min(p_info, params.p_bar)
    v0 = math.sqrt(p_info) * (vt.basis @ eq_h) / math.sqrt(gain) if p_info > 0 else np.zeros(params.m, dtype=complex)

    x_tilde, psi_t, eta_t = null_h_energy_stage(params, ch)
    p_energy = params.p_bar - p_info
    w1 = math.sqrt(p_energy) * (x_tilde @ eta_t) if p_energy > 0 else None
    return SchemeIDesign(
        null_basis=vt.basis,
        p_info=p_info,
        v0=v0,
        w1=w1,
        energy=psi_t * p_energy,
    )


def _scheme2_rates(params: SystemParams, ch: ChannelSet, p_grid, x_tilde, eta_t):
    h_norm_sq = float(np.linalg.norm(ch.h) ** 2)
    leak = np.abs(ch.g @ np.conj(ch.h)) ** 2          # |h^H g_k|^2
    u = x_tilde @ eta_t
    an_gain = np.abs(ch.g @ np.conj(u)) ** 2          # |u^H g_k|^2
    rates = kernels.scheme2_rate_scan(
        p_grid, h_norm_sq, params.sigma0_sq, leak, an_gain, params.sigma_sq, params.p_bar
    )
    return rates, leak, an_gain, h_norm_sq, u


def scheme2_rate_ceiling(params: SystemParams, ch: ChannelSet, cfg: Scheme2Config | None = None) -> float:
    """Best secrecy rate this scheme reaches on its power grid; targets up
    to this value keep at least one feasible grid point."""
    cfg = cfg or Scheme2Config()
    x_tilde, _, eta_t = null_h_energy_stage(params, ch)
    p_grid = params.p_bar * np.arange(1, cfg.grid_points + 1) / cfg.grid_points
    rates, *_ = _scheme2_rates(params, ch, p_grid, x_tilde, eta_t)
    return float(np.max(rates))


def scheme2(params: SystemParams, ch: ChannelSet, cfg: Scheme2Config | None = None) -> SchemeIIDesign:
    ch.validate_against(params)
    cfg = cfg or Scheme2Config()
    x_tilde, _, eta_t = null_h_energy_stage(params, ch)
    p_grid = params.p_bar * np.arange(1, cfg.grid_points + 1) / cfg.grid_points
    rates, leak, an_gain, h_norm_sq, u = _scheme2_rates(params, ch, p_grid, x_tilde, eta_t)
    feasible = rates >= params.r_bar
    if not np.any(feasible):
        raise InfeasibleTargetError(
            f"scheme 2 has no feasible power split for target {params.r_bar} bits",
            r_max=float(np.max(rates)),
        )
    idx = np.flatnonzero(feasible)
    connected = bool(np.all(np.diff(idx) == 1))

    def rate_at(p):
        return float(
            kernels.scheme2_rate_scan(
                np.array([p]), h_norm_sq, params.sigma0_sq, leak, an_gain,
                params.sigma_sq, params.p_bar,
            )[0]
        )

    def bisect(p_bad, p_good):
        # p_good feasible, p_bad not; shrink to boundary_tol * p_bar
        tol = cfg.boundary_tol * params.p_bar
        while abs(p_good - p_bad) > tol:
            mid = 0.5 * (p_good + p_bad)
            if rate_at(mid) >= params.r_bar:
                p_good = mid
            else:
                p_bad = mid
        return p_good

    first, last = int(idx[0]), int(idx[-1])
    p_min = float(p_grid[first])
    # the split set is open at zero, so p = 0 is never a boundary target;
    # at a zero-rate target the first grid point simply stays the minimum
    lower_neighbor = float(p_grid[first - 1]) if first > 0 else 0.0
    if rate_at(lower_neighbor) < params.r_bar:
        p_min = bisect(lower_neighbor, p_min)
    p_max = float(p_grid[last])
    if last < len(p_grid) - 1:
        upper_neighbor = float(p_grid[last + 1])
        if rate_at(upper_neighbor) < params.r_bar:
            p_max = bisect(upper_neighbor, p_max)

    info_gain = float(np.dot(params.mu, leak)) / h_norm_sq
    an_weighted = float(np.dot(params.mu, an_gain))
    branch = "max_power" if info_gain >= an_weighted else "min_power"
    p_star = p_max if branch == "max_power" else p_min

    v0 = math.sqrt(p_star) * ch.h / math.sqrt(h_norm_sq)
    p_energy = params.p_bar - p_star
    w1 = math.sqrt(p_energy) * u if p_energy > 0 else None
    w = w1[:, None] if w1 is not None else np.zeros((params.m, 0))
    _, weighted = compute_energy(
        ch, BeamformingSolution(v0=v0, w=w, scheme_tag="sub2"), params
    )
    return SchemeIIDesign(
        p_info=p_star,
        p_min=p_min,
        p_max=p_max,
        branch=branch,
        v0=v0,
        w1=w1,
        energy=float(weighted),
        feasible_set_connected=connected,
    )
