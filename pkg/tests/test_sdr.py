import io
import math

import numpy as np
import pytest

from conftest import draw_channels, make_params, orthogonal_channels
from swiptbf.errors import SolverStateError, ValidationError
from swiptbf.linalg import hermitian_evd
from swiptbf.sdr import (
    SolverConfig,
    build_instance,
    check_feasibility,
    dump_instance,
    gamma_grid,
    gamma_upper_bound,
    kkt_matrices,
    solve_sdr,
)

cp = pytest.importorskip("cvxpy")


def scheme1_feasible_rate(params, ch, frac):
    """A secrecy target known to be feasible: a fraction of the rate the
    zero-leakage closed form can reach with the full budget."""
    from swiptbf.linalg import svd_right_null

    vt = svd_right_null(ch.g_matrix()).basis
    gain = float(np.linalg.norm(vt.conj().T @ ch.h) ** 2)
    return frac * math.log2(1.0 + params.p_bar * gain / params.sigma0_sq)


def feasible_setup(seed, rate_frac=0.6, u=0.5, m=4, k=3):
    """(params, ch, gamma0) with a target below the zero-leakage ceiling
    and gamma0 inside the interval where a feasible point is guaranteed."""
    from swiptbf.linalg import svd_right_null

    base = make_params(m=m, k=k, r_bar=0.0)
    ch = draw_channels(base, seed=seed)
    vt = svd_right_null(ch.g_matrix()).basis
    gain = float(np.linalg.norm(vt.conj().T @ ch.h) ** 2)
    hi = base.p_bar * gain / base.sigma0_sq
    r_bar = rate_frac * math.log2(1.0 + hi)
    params = make_params(m=m, k=k, r_bar=r_bar)
    lo = 2.0**r_bar - 1.0
    gamma0 = lo * (hi / lo) ** u
    return params, ch, gamma0


def cvxpy_solve(inst):
    m, k = inst.m, inst.k
    s = cp.Variable((m, m), hermitian=True)
    q = cp.Variable((m, m), hermitian=True)
    cons = [s >> 0, q >> 0]
    cons.append(
        cp.real(cp.trace(inst.h_outer @ s))
        >= inst.gamma0 * (cp.real(cp.trace(inst.h_outer @ q)) + inst.sigma0_sq)
    )
    for i in range(k):
        cons.append(
            cp.real(cp.trace(inst.g_outers[i] @ s))
            <= inst.gamma_e * (cp.real(cp.trace(inst.g_outers[i] @ q)) + inst.sigma_sq[i])
        )
    cons.append(cp.real(cp.trace(s)) + cp.real(cp.trace(q)) <= inst.p_bar)
    prob = cp.Problem(
        cp.Maximize(cp.real(cp.trace(inst.obj_weights @ (s + q)))), cons
    )
    prob.solve(solver=cp.CLARABEL)
    return prob


class TestBuildInstance:
    def test_gamma_e_formula(self):
        params = make_params(r_bar=1.0)
        ch = draw_channels(params, seed=0)
        inst = build_instance(params, ch, gamma0=3.0)
        assert inst.gamma_e == pytest.approx(1.0)

    def test_gamma_e_boundary_zero(self):
        params = make_params(r_bar=2.0)
        ch = draw_channels(params, seed=0)
        inst = build_instance(params, ch, gamma0=3.0)
        assert inst.gamma_e == 0.0

    def test_below_bound_rejected(self):
        params = make_params(r_bar=2.0)
        ch = draw_channels(params, seed=0)
        with pytest.raises(ValidationError):
            build_instance(params, ch, gamma0=2.5)

    @pytest.mark.parametrize("seed", range(4))
    def test_secrecy_identity(self, seed):
        rng = np.random.default_rng(seed)
        r_bar = float(rng.uniform(0.1, 3.0))
        params = make_params(r_bar=r_bar)
        ch = draw_channels(params, seed=seed)
        gamma0 = float((2.0**r_bar - 1.0) * rng.uniform(1.5, 20.0))
        inst = build_instance(params, ch, gamma0)
        ident = math.log2(1 + inst.gamma0) - math.log2(1 + inst.gamma_e)
        assert ident == pytest.approx(r_bar, abs=1e-12)

    def test_rank_one_channel_matrices(self):
        params = make_params()
        ch = draw_channels(params, seed=1)
        inst = build_instance(params, ch, gamma0=1.0)
        evals = np.linalg.eigvalsh(inst.h_outer)
        assert evals[-1] == pytest.approx(np.linalg.norm(ch.h) ** 2, rel=1e-12)
        assert np.all(np.abs(evals[:-1]) <= 1e-12 * evals[-1])


class TestSolveSdr:
    def test_vacuous_secrecy_reaches_energy_ceiling(self):
        # with enormous ER noise the eavesdropper row never binds, so the
        # optimum is the top eigenvalue of the weight matrix times P_bar,
        # reached by aligning all power with the best energy direction
        params = make_params(m=4, k=1, r_bar=0.0, sigma_sq=[1e3])
        ch = draw_channels(make_params(m=4, k=1), seed=3)
        inst0 = build_instance(params, ch, 0.0)
        evd = hermitian_evd(inst0.obj_weights)
        eta = evd.top_vector
        gamma0 = 0.5 * params.p_bar * abs(np.vdot(eta, ch.h)) ** 2 / params.sigma0_sq
        inst = build_instance(params, ch, gamma0)
        sol = solve_sdr(inst)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(evd.top_value * params.p_bar, rel=1e-6)

    def test_zero_power_budget_infeasible(self):
        params = make_params(r_bar=1.0)
        ch = draw_channels(params, seed=4)
        inst = build_instance(params, ch, gamma0=3.0)
        object.__setattr__(inst, "p_bar", 0.0)
        sol = solve_sdr(inst)
        assert sol.status == "infeasible"
        cert = sol.certificate
        assert cert is not None
        assert cert["rhs_combination"] < 0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_independent_solver(self, seed):
        params, ch, gamma0 = feasible_setup(seed + 20, rate_frac=0.5, u=0.4)
        inst = build_instance(params, ch, gamma0)
        sol = solve_sdr(inst)
        assert sol.status == "optimal"
        ref = cvxpy_solve(inst)
        assert ref.status in ("optimal", "optimal_inaccurate")
        assert sol.objective == pytest.approx(ref.value, rel=1e-5)

    @pytest.mark.parametrize("seed", range(5))
    def test_kkt_quality(self, seed):
        params, ch, gamma0 = feasible_setup(seed + 40, rate_frac=0.7, u=0.5)
        inst = build_instance(params, ch, gamma0)
        sol = solve_sdr(inst)
        assert sol.status == "optimal"
        assert sol.kkt.primal_infeasibility <= 1e-7
        assert sol.kkt.dual_infeasibility <= 1e-7
        assert abs(sol.kkt.tr_as) <= 1e-6 * inst.p_bar * np.linalg.norm(inst.obj_weights, 2)
        assert abs(sol.kkt.tr_bq) <= 1e-6 * inst.p_bar * np.linalg.norm(inst.obj_weights, 2)
        assert np.linalg.eigvalsh(sol.s)[0] >= -1e-8
        assert np.linalg.eigvalsh(sol.q)[0] >= -1e-8

    @pytest.mark.parametrize("seed", range(5))
    def test_lemma_positive_duals_and_tightness(self, seed):
        params, ch, gamma0 = feasible_setup(seed + 60, rate_frac=0.7, u=0.5)
        inst = build_instance(params, ch, gamma0)
        sol = solve_sdr(inst)
        assert sol.status == "optimal"
        assert "dual_floor_violation" not in sol.flags
        assert sol.lam >= 1e-9
        assert sol.theta >= 1e-9
        # IR-SINR and power rows tight
        tr_hs = float(np.real(np.trace(inst.h_outer @ sol.s)))
        tr_hq = float(np.real(np.trace(inst.h_outer @ sol.q)))
        lhs = tr_hs
        rhs = inst.gamma0 * (tr_hq + inst.sigma0_sq)
        assert abs(lhs - rhs) <= 1e-7 * max(1.0, abs(lhs))
        power = float(np.real(np.trace(sol.s + sol.q)))
        assert abs(power - inst.p_bar) <= 1e-7 * inst.p_bar

    def test_zero_leakage_corner_beats_closed_form_floor(self):
        # gamma0 at the exact lower bound forces zero leakage; the result
        # must be at least the closed-form null-space design's energy
        from swiptbf.linalg import svd_right_null

        params = make_params(r_bar=1.0)
        ch = draw_channels(params, seed=80)
        gamma0 = 2.0**params.r_bar - 1.0
        inst = build_instance(params, ch, gamma0)
        assert inst.gamma_e == 0.0
        sol = solve_sdr(inst)
        assert sol.status == "optimal"
        assert "zero_leakage_support" in sol.flags
        # closed-form floor: matched beam in null(G), leftover power on the
        # best null(h) energy direction
        vt = svd_right_null(ch.g_matrix()).basis
        gain = float(np.linalg.norm(vt.conj().T @ ch.h) ** 2)
        p_info = gamma0 * params.sigma0_sq / gain
        assert p_info < params.p_bar
        t = np.eye(4) - np.outer(ch.h, ch.h.conj()) / np.linalg.norm(ch.h) ** 2
        floor_dir = hermitian_evd(t @ inst.obj_weights @ t).top_value
        floor = floor_dir * (params.p_bar - p_info)
        assert sol.objective >= floor - 1e-9
        # leakage truly zero
        for k in range(params.k):
            assert float(np.real(np.trace(inst.g_outers[k] @ sol.s))) <= 1e-9

    def test_zero_leakage_matches_independent_solver(self):
        # a direct external solve lacks Slater at this corner and comes
        # back inaccurate, so the reference solves the same null-space
        # restriction (exact algebra) with an independent solver
        from swiptbf.linalg import svd_right_null

        params = make_params(r_bar=1.0)
        ch = draw_channels(params, seed=81)
        inst = build_instance(params, ch, 2.0**params.r_bar - 1.0)
        sol = solve_sdr(inst)
        assert sol.status == "optimal"

        vt = svd_right_null(ch.g_matrix()).basis
        mt = vt.shape[1]
        m = inst.m
        h_red = vt.conj().T @ inst.h_outer @ vt
        w_red = vt.conj().T @ inst.obj_weights @ vt
        st = cp.Variable((mt, mt), hermitian=True)
        q = cp.Variable((m, m), hermitian=True)
        cons = [
            st >> 0,
            q >> 0,
            cp.real(cp.trace(h_red @ st))
            >= inst.gamma0 * (cp.real(cp.trace(inst.h_outer @ q)) + inst.sigma0_sq),
            cp.real(cp.trace(st)) + cp.real(cp.trace(q)) <= inst.p_bar,
        ]
        prob = cp.Problem(
            cp.Maximize(
                cp.real(cp.trace(w_red @ st)) + cp.real(cp.trace(inst.obj_weights @ q))
            ),
            cons,
        )
        prob.solve(solver=cp.CLARABEL)
        assert prob.status == "optimal"
        assert sol.objective == pytest.approx(prob.value, rel=1e-5)


class TestKktMatrices:
    def test_requires_optimal(self):
        params = make_params(r_bar=1.0)
        ch = draw_channels(params, seed=4)
        inst = build_instance(params, ch, gamma0=3.0)
        object.__setattr__(inst, "p_bar", 0.0)
        sol = solve_sdr(inst)
        with pytest.raises(SolverStateError):
            kkt_matrices(inst, sol)

    def test_zero_dual_matrices_equal_weights(self):
        params = make_params(r_bar=1.0)
        ch = draw_channels(params, seed=5)
        inst = build_instance(params, ch, gamma0=3.0)
        sol = solve_sdr(inst)
        sol.lam, sol.theta = 0.0, 0.0
        sol.beta = np.zeros(3)
        mats = kkt_matrices(inst, sol)
        assert np.allclose(mats.a, inst.obj_weights)
        assert np.allclose(mats.b, inst.obj_weights)
        assert np.allclose(mats.d_star, inst.obj_weights)

    @pytest.mark.parametrize("seed", range(4))
    def test_d_star_identity(self, seed):
        params, ch, gamma0 = feasible_setup(seed + 100, rate_frac=0.5, u=0.6)
        inst = build_instance(params, ch, gamma0)
        sol = solve_sdr(inst)
        mats = kkt_matrices(inst, sol)
        ident = mats.a - sol.lam * (1.0 + inst.gamma0) * inst.h_outer
        assert np.linalg.norm(ident - mats.d_star) <= 1e-9 * max(
            1.0, np.linalg.norm(mats.d_star)
        )

    @pytest.mark.parametrize("seed", range(4))
    def test_complementary_slackness(self, seed):
        params, ch, gamma0 = feasible_setup(seed + 120, rate_frac=0.4, u=0.3)
        inst = build_instance(params, ch, gamma0)
        sol = solve_sdr(inst)
        mats = kkt_matrices(inst, sol)
        scale = inst.p_bar * np.linalg.norm(inst.obj_weights, 2)
        assert abs(np.real(np.trace(mats.a @ sol.s))) <= 1e-6 * scale
        assert abs(np.real(np.trace(mats.b @ sol.q))) <= 1e-6 * scale


class TestFeasibility:
    def test_zero_target_feasible(self):
        params = make_params(r_bar=0.0)
        ch = draw_channels(params, seed=7)
        rep = check_feasibility(params, ch, n_gamma=24, bisect_tol=0.05)
        assert rep.feasible

    def test_capacity_bound_infeasible(self):
        params0 = make_params(r_bar=0.0)
        ch = draw_channels(params0, seed=8)
        cap = math.log2(1.0 + gamma_upper_bound(params0, ch))
        params = make_params(r_bar=cap + 0.5)
        rep = check_feasibility(params, ch, n_gamma=24, bisect_tol=0.05)
        assert not rep.feasible
        assert rep.r_max < cap + 0.5

    def test_known_feasible_target(self):
        params0 = make_params(r_bar=0.0)
        ch = draw_channels(params0, seed=9)
        r = scheme1_feasible_rate(params0, ch, 0.5)
        params = make_params(r_bar=r)
        rep = check_feasibility(params, ch, n_gamma=32, bisect_tol=0.05)
        assert rep.feasible
        assert rep.r_max >= r


class TestGammaGrid:
    def test_bounds(self):
        params = make_params(r_bar=1.0)
        ch = draw_channels(params, seed=10)
        grid = gamma_grid(params, ch, params.r_bar, 50)
        assert grid[0] == pytest.approx(1.0)
        assert grid[-1] == pytest.approx(gamma_upper_bound(params, ch))
        assert np.all(np.diff(grid) > 0)

    def test_zero_rate_grid_starts_at_zero(self):
        params = make_params(r_bar=0.0)
        ch = draw_channels(params, seed=10)
        grid = gamma_grid(params, ch, 0.0, 50)
        assert grid[0] == 0.0


class TestDump:
    def test_dump_contains_all_matrices(self):
        params = make_params(r_bar=1.0)
        ch = draw_channels(params, seed=11)
        inst = build_instance(params, ch, gamma0=3.0)
        buf = io.StringIO()
        dump_instance(inst, buf)
        text = buf.getvalue()
        assert "sdr-instance version 1" in text
        # IR row + K eavesdropper rows + power row + cone membership line
        assert text.count("constraint") == 3 + params.k
        assert "W rows 4 cols 4" in text
