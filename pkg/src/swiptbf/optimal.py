"""Globally optimal beam design via the two-stage relaxation.

The joint design splits into: fix the IR SINR gamma0, solve the convex
relaxation for the best energy g(gamma0), then maximize g over gamma0 by
a dense logarithmic grid followed by golden-section refinement (the
search records its full trace because unimodality of g is not
established).  A relaxation optimum with rank(S) > 1 is reduced to rank
one by projecting S onto the orthogonal complement of null(D*), where D*
is assembled from the dual variables; the stripped components move into
the energy covariance, preserving the objective and every constraint.

The no-AN shortcut: when the target rate is below what the full-power
best-energy beam already achieves (including every zero target, where the
secrecy constraint is vacuous by convention), that beam is returned
directly with the unconstrained energy ceiling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleTargetError, NumericalError, ReconstructionError, SolverStateError
from .linalg import fix_phase, hermitian_evd, nullspace, orth_complement_projector
from .model import (
    BeamformingSolution,
    ChannelSet,
    SystemParams,
    compute_energy,
    compute_secrecy_rate,
)
from .sdr import (
    SdrInstance,
    SdrSolution,
    SolverConfig,
    _primal_violations,
    build_instance,
    check_feasibility,
    gamma_grid,
    kkt_matrices,
    solve_sdr,
)

__all__ = [
    "SearchConfig",
    "TrivialCaseReport",
    "GammaValue",
    "GammaSearchTrace",
    "RankReduction",
    "OptimalDesign",
    "trivial_case",
    "g_of_gamma",
    "rank_reduce",
    "extract_beams",
    "solve_optimal",
]

_LN2 = math.log(2.0)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SearchConfig:
    grid_points: int = 100
    rel_tol: float = 1e-4
    max_refine_iter: int = 80
    null_rel_tol: float = 1e-7
    rank_one_rel: float = 1e-7
    beam_floor_rel: float = 1e-9


@dataclass(frozen=True)
class TrivialCaseReport:
    """No-AN shortcut data: best energy direction and its secrecy rate."""

    psi: float               # top eigenvalue of sum_k mu_k zeta g_k g_k^H
    eta: np.ndarray          # its unit eigenvector
    e_max: float             # psi * P_bar, the unconstrained energy ceiling
    eta_rate: float          # secrecy rate of v0 = sqrt(P) eta (may be < 0)
    applies: bool            # target <= max(0, eta_rate)


@dataclass(frozen=True)
class GammaValue:
    value: float
    sdr: SdrSolution
    instance: SdrInstance


@dataclass(frozen=True)
class GammaSearchTrace:
    grid: tuple               # (gamma0, g value or -inf, status) per evaluation
    best_gamma0: float
    refinement_iterations: int


@dataclass(frozen=True)
class RankReduction:
    s_bar: np.ndarray
    q_bar: np.ndarray
    tau: np.ndarray
    b: float
    a: np.ndarray            # null-direction loads stripped out of S
    null_dim: int
    rank_q_pre: int          # eigenvalues of Q above 1e-9 * Tr(Q), before reduction
    passthrough: bool


@dataclass(frozen=True)
class OptimalDesign:
    beams: BeamformingSolution
    trace: GammaSearchTrace
    energy: float
    trivial: TrivialCaseReport
    sdr: SdrSolution | None = None
    reduction: RankReduction | None = None


def trivial_case(params: SystemParams, ch: ChannelSet) -> TrivialCaseReport:
    """Check whether the unconstrained energy beam already meets the target."""
    ch.validate_against(params)
    weights = np.zeros((params.m, params.m), dtype=np.complex128)
    for k in range(params.k):
        weights += params.mu[k] * params.zeta * np.outer(ch.g[k], ch.g[k].conj())
    evd = hermitian_evd((weights + weights.conj().T) / 2.0)
    psi = evd.top_value
    eta = evd.top_vector
    rate_ir = math.log1p(params.p_bar * abs(np.vdot(eta, ch.h)) ** 2 / params.sigma0_sq) / _LN2
    eta_rate = math.inf
    for k in range(params.k):
        gain = abs(np.vdot(eta, ch.g[k])) ** 2
        eta_rate = min(
            eta_rate,
            rate_ir - math.log1p(params.p_bar * gain / float(params.sigma_sq[k])) / _LN2,
        )
    return TrivialCaseReport(
        psi=psi,
        eta=eta,
        e_max=psi * params.p_bar,
        eta_rate=eta_rate,
        applies=params.r_bar <= max(0.0, eta_rate),
    )


def g_of_gamma(
    params: SystemParams,
    ch: ChannelSet,
    gamma0: float,
    solver_cfg: SolverConfig | None = None,
) -> GammaValue:
    """Optimal relaxation value at one gamma0; -inf when infeasible."""
    inst = build_instance(params, ch, gamma0)
    sol = solve_sdr(inst, solver_cfg)
    if sol.status == "optimal":
        return GammaValue(value=sol.objective, sdr=sol, instance=inst)
    if sol.status == "infeasible":
        return GammaValue(value=-math.inf, sdr=sol, instance=inst)
    raise NumericalError(
        f"relaxation solve failed at gamma0 = {gamma0}: {sol.message}",
        iterations=sol.iterations,
        residuals=sol.kkt,
    )


def rank_reduce(inst: SdrInstance, sol: SdrSolution, cfg: SearchConfig | None = None) -> RankReduction:
    """Project S onto the complement of null(D*) and move the remainder
    into Q; verifies objective, trace and all constraints afterwards."""
    cfg = cfg or SearchConfig()
    if sol.status != "optimal":
        raise SolverStateError("rank reduction requires an optimal relaxation solution")
    s, q = sol.s, sol.q
    tr_q = float(np.real(np.trace(q)))
    q_evals = np.linalg.eigvalsh(q)
    rank_q_pre = int(np.sum(q_evals > cfg.beam_floor_rel * max(tr_q, 1e-300)))

    s_evd = hermitian_evd(s)
    if s_evd.eigenvalues[0] <= 0.0:
        raise ReconstructionError(
            "information covariance is numerically zero", eigenvalues=s_evd.eigenvalues
        )
    if s_evd.eigenvalues[1] <= cfg.rank_one_rel * s_evd.eigenvalues[0]:
        return RankReduction(
            s_bar=s,
            q_bar=q,
            tau=s_evd.top_vector,
            b=float(np.real(np.trace(s))),
            a=np.zeros(0),
            null_dim=0,
            rank_q_pre=rank_q_pre,
            passthrough=True,
        )

    mats = kkt_matrices(inst, sol)
    null = nullspace(mats.d_star, rel_tol=cfg.null_rel_tol)
    proj = orth_complement_projector(null)
    s_bar = proj @ s @ proj
    s_bar = (s_bar + s_bar.conj().T) / 2.0
    q_bar = q + (s - s_bar)
    q_bar = (q_bar + q_bar.conj().T) / 2.0
    loads = np.real(np.einsum("ij,jk,ki->i", null.basis.conj().T, s, null.basis))

    bar_evd = hermitian_evd(s_bar)
    if bar_evd.eigenvalues[0] <= 0.0 or (
        bar_evd.eigenvalues.shape[0] > 1
        and bar_evd.eigenvalues[1] > cfg.rank_one_rel * bar_evd.eigenvalues[0]
    ):
        raise ReconstructionError(
            "projection onto the D* range did not leave a rank-one S",
            eigenvalues=bar_evd.eigenvalues,
        )

    # the reconstruction must not perturb the optimum: same objective,
    # same total power, still feasible
    obj_before = inst.objective_value(s, q)
    obj_after = inst.objective_value(s_bar, q_bar)
    if abs(obj_after - obj_before) > 1e-9 * max(abs(obj_before), 1e-300):
        raise ReconstructionError(
            f"objective moved from {obj_before} to {obj_after} during reconstruction",
            eigenvalues=bar_evd.eigenvalues,
        )
    tr_before = float(np.real(np.trace(s + q)))
    tr_after = float(np.real(np.trace(s_bar + q_bar)))
    if abs(tr_after - tr_before) > 1e-9 * max(tr_before, 1e-300):
        raise ReconstructionError("total power changed during reconstruction")
    if _primal_violations(inst, s_bar, q_bar) > 1e-7:
        raise ReconstructionError("reconstructed matrices violate a constraint")

    return RankReduction(
        s_bar=s_bar,
        q_bar=q_bar,
        tau=bar_evd.top_vector,
        b=float(np.real(np.trace(s_bar))),
        a=np.maximum(loads, 0.0),
        null_dim=null.dim,
        rank_q_pre=rank_q_pre,
        passthrough=False,
    )


def extract_beams(red: RankReduction, params: SystemParams, cfg: SearchConfig | None = None) -> BeamformingSolution:
    """Information beam from the rank-one S, energy beams from the EVD of
    Q above the noise floor (1e-9 of its trace)."""
    cfg = cfg or SearchConfig()
    v0 = math.sqrt(max(red.b, 0.0)) * fix_phase(red.tau)
    q_evd = hermitian_evd(red.q_bar)
    tr_q = float(np.real(np.trace(red.q_bar)))
    floor = cfg.beam_floor_rel * max(tr_q, 0.0)
    cols = []
    for j in range(q_evd.eigenvalues.shape[0]):
        val = q_evd.eigenvalues[j]
        if val > floor and val > 0.0:
            cols.append(math.sqrt(val) * q_evd.eigenvectors[:, j])
    w = np.stack(cols, axis=1) if cols else np.zeros((params.m, 0), dtype=complex)
    beams = BeamformingSolution(v0=v0, w=w, scheme_tag="optimal")
    if beams.d > params.m:
        raise ReconstructionError(f"extracted {beams.d} energy beams for M={params.m}")
    power = beams.total_power()
    if power > params.p_bar * (1.0 + 1e-8):
        raise ReconstructionError(f"extracted beams use {power} W against budget {params.p_bar} W")
    return beams


def _golden_refine(evaluate, a, b, search_cfg):
    """Golden-section shrink of [a, b] around the incumbent; every probe
    lands in the shared trace.  Returns the refinement iteration count."""
    iters = 0
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1 = evaluate(x1)
    f2 = evaluate(x2)
    while (b - a) > search_cfg.rel_tol * max(abs(a), abs(b), 1e-12):
        iters += 1
        if iters > search_cfg.max_refine_iter:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = evaluate(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = evaluate(x2)
    return iters


def solve_optimal(
    params: SystemParams,
    ch: ChannelSet,
    search_cfg: SearchConfig | None = None,
    solver_cfg: SolverConfig | None = None,
) -> OptimalDesign:
    """Full optimal design: shortcut, gamma0 search, rank-one extraction."""
    search_cfg = search_cfg or SearchConfig()
    solver_cfg = solver_cfg or SolverConfig()
    ch.validate_against(params)
    trivial = trivial_case(params, ch)

    if trivial.applies:
        v0 = math.sqrt(params.p_bar) * fix_phase(trivial.eta)
        beams = BeamformingSolution(v0=v0, w=np.zeros((params.m, 0)), scheme_tag="trivial")
        _, energy = compute_energy(ch, beams, params)
        sinr0 = params.p_bar * abs(np.vdot(trivial.eta, ch.h)) ** 2 / params.sigma0_sq
        trace = GammaSearchTrace(grid=(), best_gamma0=float(sinr0), refinement_iterations=0)
        return OptimalDesign(beams=beams, trace=trace, energy=energy, trivial=trivial)

    cache: dict[float, GammaValue] = {}
    trace_rows: list = []

    def evaluate(gamma0: float) -> float:
        gamma0 = float(gamma0)
        if gamma0 in cache:
            return cache[gamma0].value
        try:
            gv = g_of_gamma(params, ch, gamma0, solver_cfg)
            status = gv.sdr.status
        except NumericalError:
            gv = GammaValue(value=-math.inf, sdr=None, instance=None)
            status = "numerical_failure"
        cache[gamma0] = gv
        trace_rows.append((gamma0, gv.value, status))
        return gv.value

    grid = gamma_grid(params, ch, params.r_bar, search_cfg.grid_points)
    values = np.array([evaluate(g) for g in grid])
    if not np.any(np.isfinite(values)):
        report = check_feasibility(params, ch, solver_cfg)
        raise InfeasibleTargetError(
            f"no gamma0 on the search grid admits the target {params.r_bar} bits "
            f"(estimated ceiling {report.r_max:.6f})",
            r_max=report.r_max,
        )
    i_best = int(np.argmax(values))
    a = grid[max(i_best - 1, 0)]
    b = grid[min(i_best + 1, len(grid) - 1)]
    iters = _golden_refine(evaluate, float(a), float(b), search_cfg)

    best_gamma0 = max(cache, key=lambda g: cache[g].value)
    best = cache[best_gamma0]
    trace = GammaSearchTrace(
        grid=tuple(trace_rows), best_gamma0=float(best_gamma0), refinement_iterations=iters
    )

    reduction = rank_reduce(best.instance, best.sdr, search_cfg)
    beams = extract_beams(reduction, params, search_cfg)
    achieved = compute_secrecy_rate(ch, beams, params)
    if params.r_bar > 0.0 and achieved < params.r_bar - 1e-6:
        raise ReconstructionError(
            f"extracted beams achieve {achieved} bits against target {params.r_bar}"
        )
    _, energy = compute_energy(ch, beams, params)
    return OptimalDesign(
        beams=beams,
        trace=trace,
        energy=energy,
        trivial=trivial,
        sdr=best.sdr,
        reduction=reduction,
    )
