"""Convex relaxation core: build, solve and certify the fixed-SINR SDP.

For a fixed IR SINR target gamma0 the beam design problem relaxes to

    maximize    sum_k mu_k zeta (Tr(G_k S) + Tr(G_k Q))
    subject to  Tr(H S) >= gamma0 (Tr(H Q) + sigma0^2)
                Tr(G_k S) <= gamma_e (Tr(G_k Q) + sigma_k^2)   for all k
                Tr(S) + Tr(Q) <= P_bar
                S >= 0,  Q >= 0

with H = h h^H, G_k = g_k g_k^H and gamma_e = (1+gamma0)/2^rbar - 1.
The eavesdropper rows are kept in multiplied-through form so the corner
gamma_e = 0 degenerates cleanly to Tr(G_k S) <= 0; that corner is solved
on the null-space support of the ER channels where the problem regains a
strict interior.

Each complex Hermitian variable is embedded as a real symmetric matrix
[[X_re, -X_im], [X_im, X_re]] of twice the order and handed to the dense
interior-point core in :mod:`swiptbf.conic`.  Returned duals
(lambda, beta_k, theta) are refined by a least-squares solve of the
complementarity system on the detected active set, which pushes the KKT
residuals far enough below solver tolerance for the rank-reduction step
to resolve null spaces reliably.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conic
from .errors import SolverStateError, ValidationError
from .linalg import hermitian_evd, nullspace
from .model import ChannelSet, SystemParams

__all__ = [
    "SolverConfig",
    "SdrInstance",
    "SdrSolution",
    "KktResiduals",
    "KktMatrices",
    "FeasibilityReport",
    "build_instance",
    "solve_sdr",
    "kkt_matrices",
    "check_feasibility",
    "gamma_grid",
    "gamma_upper_bound",
    "dump_instance",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SolverConfig:
    """Interior-point tolerances (defaults: 1e-8 residuals/gap, 200 iters)."""

    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    dual_floor: float = 1e-9
    polish: bool = True
    refine_duals: bool = True


@dataclass(frozen=True)
class SdrInstance:
    """Data of the relaxed problem at one fixed gamma0."""

    h_outer: np.ndarray          # H = h h^H
    g_outers: np.ndarray         # (K, M, M), G_k = g_k g_k^H
    gamma0: float
    gamma_e: float
    sigma0_sq: float
    sigma_sq: np.ndarray
    p_bar: float
    obj_weights: np.ndarray      # sum_k mu_k zeta G_k

    @property
    def m(self) -> int:
        return int(self.h_outer.shape[0])

    @property
    def k(self) -> int:
        return int(self.g_outers.shape[0])

    @property
    def r_bar(self) -> float:
        """Secrecy target implied by (gamma0, gamma_e)."""
        return math.log2((1.0 + self.gamma0) / (1.0 + self.gamma_e))

    def objective_value(self, s, q) -> float:
        return float(np.real(np.trace(self.obj_weights @ (s + q))))

    def eta_rate_ceiling(self) -> float:
        """Secrecy rate of the full-power max-energy beam (may be < 0).

        This is the threshold below which the no-AN shortcut is optimal;
        above it the dual variables of the IR-SINR and power rows are
        provably positive.
        """
        evd = hermitian_evd(self.obj_weights)
        eta = evd.top_vector
        gain_ir = float(np.real(eta.conj() @ self.h_outer @ eta))
        rate_ir = math.log1p(self.p_bar * gain_ir / self.sigma0_sq) / _LN2
        worst = math.inf
        for k in range(self.k):
            gain = float(np.real(eta.conj() @ self.g_outers[k] @ eta))
            rate_ev = math.log1p(self.p_bar * gain / float(self.sigma_sq[k])) / _LN2
            worst = min(worst, rate_ir - rate_ev)
        return worst


@dataclass(frozen=True)
class KktResiduals:
    primal_infeasibility: float
    dual_infeasibility: float
    complementarity_gap: float
    tr_as: float = 0.0
    tr_bq: float = 0.0


@dataclass
class SdrSolution:
    status: str  # optimal | infeasible | numerical_failure
    s: np.ndarray | None
    q: np.ndarray | None
    lam: float
    beta: np.ndarray
    theta: float
    objective: float
    kkt: KktResiduals
    iterations: int = 0
    flags: tuple = ()
    certificate: dict | None = None
    message: str = ""


@dataclass(frozen=True)
class KktMatrices:
    a: np.ndarray
    b: np.ndarray
    d_star: np.ndarray


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    r_max: float


def build_instance(params: SystemParams, ch: ChannelSet, gamma0: float) -> SdrInstance:
    """Form rank-one channel matrices and the eavesdropper SINR cap.

    Requires gamma0 >= 2^rbar - 1 so that gamma_e >= 0; values within a
    few ulp of the bound clamp gamma_e to exactly zero.
    """
    ch.validate_against(params)
    two_r = math.pow(2.0, params.r_bar)
    lo = two_r - 1.0
    if gamma0 < lo * (1.0 - 1e-12) - 1e-300:
        raise ValidationError(
            f"gamma0 = {gamma0} below lower bound 2^rbar - 1 = {lo}"
        )
    gamma_e = (1.0 + gamma0) / two_r - 1.0
    if gamma_e < 0.0:
        if gamma_e < -1e-12 * (1.0 + gamma0) / two_r:
            raise ValidationError(f"gamma0 = {gamma0} gives negative gamma_e")
        gamma_e = 0.0
    h_outer = np.outer(ch.h, ch.h.conj())
    g_outers = np.einsum("ki,kj->kij", ch.g, ch.g.conj())
    weights = np.tensordot(params.mu * params.zeta, g_outers, axes=(0, 0))
    return SdrInstance(
        h_outer=h_outer,
        g_outers=g_outers,
        gamma0=float(gamma0),
        gamma_e=float(gamma_e),
        sigma0_sq=params.sigma0_sq,
        sigma_sq=params.sigma_sq.copy(),
        p_bar=params.p_bar,
        obj_weights=(weights + weights.conj().T.copy()) / 2.0,
    )


# --- Hermitian <-> real coordinates ---------------------------------------

_EMB_CACHE: dict[int, np.ndarray] = {}
_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def herm_coord_dim(m: int) -> int:
    return m * m


def _triu(m: int):
    if m not in _TRIU_CACHE:
        _TRIU_CACHE[m] = np.triu_indices(m, 1)
    return _TRIU_CACHE[m]


def herm_to_coords(a: np.ndarray) -> np.ndarray:
    """Orthonormal real coordinates of a Hermitian matrix.

    Layout: M diagonal entries, then sqrt(2) * upper-triangle real parts,
    then sqrt(2) * upper-triangle imaginary parts, so that
    <A, B> = Tr(AB) = coords(A) . coords(B).
    """
    m = a.shape[0]
    iu = _triu(m)
    return np.concatenate(
        [np.diag(a).real, np.sqrt(2.0) * a[iu].real, np.sqrt(2.0) * a[iu].imag]
    )


def coords_to_herm(x: np.ndarray, m: int) -> np.ndarray:
    iu = _triu(m)
    n_off = iu[0].size
    a = np.zeros((m, m), dtype=np.complex128)
    a[np.diag_indices(m)] = x[:m]
    a[iu] = (x[m : m + n_off] + 1j * x[m + n_off : m + 2 * n_off]) / np.sqrt(2.0)
    return a + np.triu(a, 1).conj().T


def real_embedding(a: np.ndarray) -> np.ndarray:
    """[[Re A, -Im A], [Im A, Re A]]; symmetric PSD iff A is Hermitian PSD."""
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def _embedding_matrix(m: int) -> np.ndarray:
    """Columns: svec(real_embedding(E_a)) over the Hermitian basis E_a."""
    if m not in _EMB_CACHE:
        p = herm_coord_dim(m)
        cols = np.empty((2 * m * (2 * m + 1) // 2, p))
        for a in range(p):
            x = np.zeros(p)
            x[a] = 1.0
            cols[:, a] = conic.svec(real_embedding(coords_to_herm(x, m)))
        _EMB_CACHE[m] = cols
    return _EMB_CACHE[m]


def _hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2.0


# --- constraint bookkeeping ------------------------------------------------


def _constraint_rows(inst: SdrInstance):
    """Orthant rows as Hermitian coefficient pairs (mat_s, mat_q, rhs)."""
    m = inst.m
    eye = np.eye(m, dtype=np.complex128)
    rows = [(-inst.h_outer, inst.gamma0 * inst.h_outer, -inst.gamma0 * inst.sigma0_sq)]
    for k in range(inst.k):
        rows.append(
            (
                inst.g_outers[k],
                -inst.gamma_e * inst.g_outers[k],
                inst.gamma_e * float(inst.sigma_sq[k]),
            )
        )
    rows.append((eye, eye, inst.p_bar))
    return rows


def _row_coords(rows, m):
    coeffs = np.array(
        [np.concatenate([herm_to_coords(ms), herm_to_coords(mq)]) for ms, mq, _ in rows]
    )
    rhs = np.array([r for _, _, r in rows])
    norms = np.linalg.norm(coeffs, axis=1)
    norms[norms == 0.0] = 1.0
    return coeffs / norms[:, None], rhs / norms, norms


def _row_coords_cached(inst: SdrInstance):
    cached = getattr(inst, "_row_cache", None)
    if cached is None:
        cached = _row_coords(_constraint_rows(inst), inst.m)
        object.__setattr__(inst, "_row_cache", cached)
    return cached


def _primal_violations(inst: SdrInstance, s, q):
    """Violations of the four constraint families, power-scaled."""
    coeffs, rhs, _ = _row_coords_cached(inst)
    x = np.concatenate([herm_to_coords(s), herm_to_coords(q)])
    lin = np.maximum(coeffs @ x - rhs, 0.0)
    scale = max(inst.p_bar, 1e-30)
    psd = max(
        0.0,
        -float(np.linalg.eigvalsh(_hermitize(s))[0]),
        -float(np.linalg.eigvalsh(_hermitize(q))[0]),
    )
    return float(max(np.max(lin), psd) / scale)


def _slacks(inst: SdrInstance, s, q):
    coeffs, rhs, norms = _row_coords_cached(inst)
    x = np.concatenate([herm_to_coords(s), herm_to_coords(q)])
    return rhs - coeffs @ x, norms


# --- dual handling ---------------------------------------------------------


def _kkt_from_duals(inst: SdrInstance, lam, beta, theta):
    eye = np.eye(inst.m)
    gsum_w = inst.obj_weights
    gsum_beta = np.tensordot(beta, inst.g_outers, axes=(0, 0))
    a = gsum_w + lam * inst.h_outer - gsum_beta - theta * eye
    b = (
        gsum_w
        - lam * inst.gamma0 * inst.h_outer
        + inst.gamma_e * gsum_beta
        - theta * eye
    )
    d_star = gsum_w - lam * inst.gamma0 * inst.h_outer - gsum_beta - theta * eye
    return _hermitize(a), _hermitize(b), _hermitize(d_star)


def _dual_metrics(inst, s, q, lam, beta, theta):
    a, b, _ = _kkt_from_duals(inst, lam, beta, theta)
    dual_inf = max(
        0.0,
        float(np.linalg.eigvalsh(a)[-1]),
        float(np.linalg.eigvalsh(b)[-1]),
    )
    tr_as = float(np.real(np.trace(a @ s)))
    tr_bq = float(np.real(np.trace(b @ q)))
    slack, _ = _slacks(inst, s, q)
    y = np.concatenate([[lam], beta, [theta]])
    compl = max(abs(tr_as), abs(tr_bq), float(np.max(np.abs(y * slack), initial=0.0)))
    return dual_inf, tr_as, tr_bq, compl


def _range_vectors(mat, rel=1e-6):
    evd = hermitian_evd(_hermitize(mat))
    top = max(evd.eigenvalues[0], 0.0)
    if top <= 0.0:
        return np.zeros((mat.shape[0], 0), dtype=np.complex128)
    keep = evd.eigenvalues > rel * top
    return evd.eigenvectors[:, keep]


def _refine_duals(inst: SdrInstance, s, q, y0, cfg: SolverConfig):
    """Least-squares re-solve of the complementarity system at the fixed
    active set; falls back to the interior-point duals when no improvement."""
    m, k = inst.m, inst.k
    slack, _ = _slacks(inst, s, q)
    cut = 1e-6 * max(1.0, inst.p_bar)
    active = [i for i in range(k + 2) if slack[i] <= cut]
    if not active:
        return y0
    vs = _range_vectors(s)
    vq = _range_vectors(q)
    if vs.shape[1] + vq.shape[1] == 0:
        return y0

    def build_system(idx):
        cols = []
        w = inst.obj_weights
        rhs_parts = []
        mats_s = {0: inst.h_outer}
        for j in range(k):
            mats_s[1 + j] = -inst.g_outers[j]
        mats_s[k + 1] = -np.eye(m)
        mats_q = {0: -inst.gamma0 * inst.h_outer}
        for j in range(k):
            mats_q[1 + j] = inst.gamma_e * inst.g_outers[j]
        mats_q[k + 1] = -np.eye(m)

        rows_s = [mats_s[i] @ vs for i in idx]
        rows_q = [mats_q[i] @ vq for i in idx]
        for lhs_s, lhs_q in zip(rows_s, rows_q):
            col = np.concatenate(
                [
                    lhs_s.real.ravel(),
                    lhs_s.imag.ravel(),
                    lhs_q.real.ravel(),
                    lhs_q.imag.ravel(),
                ]
            )
            cols.append(col)
        tgt_s = -(w @ vs)
        tgt_q = -(w @ vq)
        f = np.concatenate(
            [tgt_s.real.ravel(), tgt_s.imag.ravel(), tgt_q.real.ravel(), tgt_q.imag.ravel()]
        )
        return np.array(cols).T, f

    idx = list(active)
    y = None
    for _ in range(k + 2):
        emat, f = build_system(idx)
        sol, *_ = np.linalg.lstsq(emat, f, rcond=None)
        if np.all(sol >= -1e-12):
            y = np.maximum(sol, 0.0)
            break
        worst = idx[int(np.argmin(sol))]
        idx = [i for i in idx if i != worst]
        if not idx:
            return y0
    if y is None:
        return y0
    full = np.zeros(k + 2)
    for i, v in zip(idx, y):
        full[i] = v

    base = _dual_metrics(inst, s, q, y0[0], y0[1 : k + 1], y0[k + 1])
    cand = _dual_metrics(inst, s, q, full[0], full[1 : k + 1], full[k + 1])
    # accept only if dual feasibility stays acceptable and complementarity
    # strictly improves
    if cand[0] <= max(1e-9, base[0]) and cand[3] <= base[3]:
        return full
    return y0


def _polish_psd(mat, drop_rel=1e-8):
    evd = hermitian_evd(_hermitize(mat))
    vals = np.maximum(evd.eigenvalues, 0.0)
    top = vals[0] if vals.size else 0.0
    vals[vals < drop_rel * top] = 0.0
    keep = vals > 0.0
    v = evd.eigenvectors[:, keep]
    return _hermitize(v @ np.diag(vals[keep]) @ v.conj().T)


def _finalize(inst, cfg, s_raw, q_raw, y, iterations, flags=(), message=""):
    s_raw = _hermitize(s_raw)
    q_raw = _hermitize(q_raw)
    s, q = s_raw, q_raw
    if cfg.polish:
        s_p = _polish_psd(s_raw)
        q_p = _polish_psd(q_raw)
        obj_raw = inst.objective_value(s_raw, q_raw)
        obj_p = inst.objective_value(s_p, q_p)
        viol_raw = _primal_violations(inst, s_raw, q_raw)
        viol_p = _primal_violations(inst, s_p, q_p)
        obj_scale = max(abs(obj_raw), 1e-30)
        if abs(obj_p - obj_raw) <= 1e-9 * obj_scale and viol_p <= max(viol_raw, 1e-9):
            s, q = s_p, q_p
        else:
            flags = flags + ("polish_rejected",)

    if cfg.refine_duals:
        y = _refine_duals(inst, s, q, y, cfg)

    lam, beta, theta = float(y[0]), y[1 : inst.k + 1].copy(), float(y[inst.k + 1])
    dual_inf, tr_as, tr_bq, compl = _dual_metrics(inst, s, q, lam, beta, theta)
    kkt = KktResiduals(
        primal_infeasibility=_primal_violations(inst, s, q),
        dual_infeasibility=dual_inf,
        complementarity_gap=compl,
        tr_as=tr_as,
        tr_bq=tr_bq,
    )

    # Lemma flag: above the no-AN rate ceiling both lambda and theta must
    # be strictly positive; a floor violation is surfaced, never hidden.
    ceiling = max(0.0, inst.eta_rate_ceiling())
    if inst.r_bar > ceiling + 1e-12 and (lam < cfg.dual_floor or theta < cfg.dual_floor):
        flags = flags + ("dual_floor_violation",)

    return SdrSolution(
        status="optimal",
        s=s,
        q=q,
        lam=lam,
        beta=beta,
        theta=theta,
        objective=inst.objective_value(s, q),
        kkt=kkt,
        iterations=iterations,
        flags=flags,
        message=message,
    )


# --- cone assembly ---------------------------------------------------------


def _assemble_cone(inst: SdrInstance):
    m = inst.m
    p = 2 * herm_coord_dim(m)
    coeffs, rhs, norms = _row_coords_cached(inst)
    emb = _embedding_matrix(m)
    svecdim = emb.shape[0]
    n_orth = coeffs.shape[0]
    gmat = np.zeros((n_orth + 2 * svecdim, p))
    hvec = np.zeros(n_orth + 2 * svecdim)
    gmat[:n_orth] = coeffs
    hvec[:n_orth] = rhs
    half = herm_coord_dim(m)
    gmat[n_orth : n_orth + svecdim, :half] = -emb
    gmat[n_orth + svecdim :, half:] = -emb
    c = -np.concatenate([herm_to_coords(inst.obj_weights), herm_to_coords(inst.obj_weights)])
    cnorm = float(np.linalg.norm(c))
    if cnorm == 0.0:
        cnorm = 1.0
    dims = conic.ConeDims(nonneg=n_orth, psd=(2 * m, 2 * m))
    return c / cnorm, gmat, hvec, dims, norms, cnorm


def _certificate_from_ray(inst, z, norms, n_orth):
    y = z[:n_orth] / norms
    lam, beta, theta = float(y[0]), y[1 : inst.k + 1], float(y[inst.k + 1])
    combo = -lam * inst.gamma0 * inst.sigma0_sq
    combo += float(np.dot(beta, inst.gamma_e * inst.sigma_sq))
    combo += theta * inst.p_bar
    return {
        "lambda": lam,
        "beta": np.maximum(beta, 0.0),
        "theta": theta,
        "rhs_combination": combo,
    }


def solve_sdr(inst: SdrInstance, cfg: SolverConfig | None = None) -> SdrSolution:
    """Solve the relaxation, returning primal matrices, duals and KKT record."""
    cfg = cfg or SolverConfig()
    if inst.gamma_e == 0.0:
        return _solve_zero_leakage(inst, cfg)

    c, gmat, hvec, dims, norms, cnorm = _assemble_cone(inst)
    res = conic.solve_conic(
        c, gmat, hvec, dims,
        feas_tol=cfg.feas_tol, gap_tol=cfg.gap_tol, max_iter=cfg.max_iter,
    )
    m = inst.m
    half = herm_coord_dim(m)
    n_orth = inst.k + 2
    if res.status == "optimal":
        s = coords_to_herm(res.x[:half], m)
        q = coords_to_herm(res.x[half:], m)
        y = res.z[:n_orth] * cnorm / norms
        return _finalize(inst, cfg, s, q, y, res.iterations)
    if res.status == "primal_infeasible":
        return SdrSolution(
            status="infeasible",
            s=None,
            q=None,
            lam=0.0,
            beta=np.zeros(inst.k),
            theta=0.0,
            objective=-np.inf,
            kkt=KktResiduals(np.inf, np.inf, np.inf),
            iterations=res.iterations,
            certificate=_certificate_from_ray(inst, res.z, norms, n_orth),
            message=res.message,
        )
    return SdrSolution(
        status="numerical_failure",
        s=None,
        q=None,
        lam=0.0,
        beta=np.zeros(inst.k),
        theta=0.0,
        objective=np.nan,
        kkt=KktResiduals(res.primal_residual, res.dual_residual, res.relative_gap),
        iterations=res.iterations,
        message=res.message or "interior-point iteration did not converge",
    )


def _solve_zero_leakage(inst: SdrInstance, cfg: SolverConfig) -> SdrSolution:
    """gamma_e = 0: the information covariance must be supported on the
    common null space of every ER channel, so solve on that support.

    The restriction is exact (Tr(G_k S) <= 0 with S >= 0 forces S g_k = 0)
    and restores a strict interior that the full formulation lacks at this
    corner.  The eavesdropper duals beta_k drop out of every KKT quantity
    here except dual feasibility of A, for which a minimal completion is
    computed by a small auxiliary SDP.
    """
    m, k = inst.m, inst.k
    gsum = np.sum(inst.g_outers, axis=0)
    null = nullspace(_hermitize(gsum), rel_tol=1e-10)
    vt = null.basis
    mt = null.dim
    if mt == 0 and inst.gamma0 > 0.0:
        return SdrSolution(
            status="infeasible",
            s=None,
            q=None,
            lam=0.0,
            beta=np.zeros(k),
            theta=0.0,
            objective=-np.inf,
            kkt=KktResiduals(np.inf, np.inf, np.inf),
            message="zero-leakage corner with empty ER null space",
        )

    h_red = _hermitize(vt.conj().T @ inst.h_outer @ vt) if mt else np.zeros((0, 0))
    w_red = _hermitize(vt.conj().T @ inst.obj_weights @ vt) if mt else np.zeros((0, 0))
    eye_m = np.eye(m, dtype=np.complex128)

    p_s = herm_coord_dim(mt)
    p_q = herm_coord_dim(m)
    rows = []
    if mt:
        rows.append(
            (
                np.concatenate([herm_to_coords(-h_red), inst.gamma0 * herm_to_coords(inst.h_outer)]),
                -inst.gamma0 * inst.sigma0_sq,
            )
        )
        rows.append(
            (
                np.concatenate([herm_to_coords(np.eye(mt, dtype=complex)), herm_to_coords(eye_m)]),
                inst.p_bar,
            )
        )
    else:
        rows.append((inst.gamma0 * herm_to_coords(inst.h_outer), -inst.gamma0 * inst.sigma0_sq))
        rows.append((herm_to_coords(eye_m), inst.p_bar))
    coeffs = np.array([r for r, _ in rows])
    rhs = np.array([b for _, b in rows])
    norms = np.linalg.norm(coeffs, axis=1)
    norms[norms == 0.0] = 1.0
    coeffs = coeffs / norms[:, None]
    rhs = rhs / norms

    emb_q = _embedding_matrix(m)
    psd = []
    blocks = []
    if mt:
        emb_s = _embedding_matrix(mt)
        psd.append(2 * mt)
        blocks.append((emb_s, 0, p_s))
    psd.append(2 * m)
    blocks.append((emb_q, p_s if mt else 0, p_q))
    p_total = (p_s if mt else 0) + p_q
    n_orth = 2
    total_rows = n_orth + sum(e.shape[0] for e, _, _ in blocks)
    gmat = np.zeros((total_rows, p_total))
    hvec = np.zeros(total_rows)
    gmat[:n_orth] = coeffs
    hvec[:n_orth] = rhs
    off = n_orth
    for e, col0, ncols in blocks:
        gmat[off : off + e.shape[0], col0 : col0 + ncols] = -e
        off += e.shape[0]
    cvec = np.concatenate(
        [herm_to_coords(w_red), herm_to_coords(inst.obj_weights)]
        if mt
        else [herm_to_coords(inst.obj_weights)]
    )
    cvec = -cvec
    cnorm = float(np.linalg.norm(cvec))
    if cnorm == 0.0:
        cnorm = 1.0
    dims = conic.ConeDims(nonneg=n_orth, psd=tuple(psd))
    res = conic.solve_conic(
        cvec / cnorm, gmat, hvec, dims,
        feas_tol=cfg.feas_tol, gap_tol=cfg.gap_tol, max_iter=cfg.max_iter,
    )
    if res.status == "primal_infeasible":
        y = res.z[:n_orth] / norms
        return SdrSolution(
            status="infeasible",
            s=None,
            q=None,
            lam=float(y[0]),
            beta=np.zeros(k),
            theta=float(y[1]),
            objective=-np.inf,
            kkt=KktResiduals(np.inf, np.inf, np.inf),
            iterations=res.iterations,
            certificate={
                "lambda": float(y[0]),
                "beta": np.zeros(k),
                "theta": float(y[1]),
                "rhs_combination": float(
                    -y[0] * inst.gamma0 * inst.sigma0_sq + y[1] * inst.p_bar
                ),
            },
            message="zero-leakage corner infeasible: " + res.message,
        )
    if res.status != "optimal":
        return SdrSolution(
            status="numerical_failure",
            s=None,
            q=None,
            lam=0.0,
            beta=np.zeros(k),
            theta=0.0,
            objective=np.nan,
            kkt=KktResiduals(res.primal_residual, res.dual_residual, res.relative_gap),
            iterations=res.iterations,
            message=res.message,
        )

    if mt:
        s_red = coords_to_herm(res.x[:p_s], mt)
        s_full = _hermitize(vt @ s_red @ vt.conj().T)
        q_full = coords_to_herm(res.x[p_s:], m)
    else:
        s_full = np.zeros((m, m), dtype=np.complex128)
        q_full = coords_to_herm(res.x, m)
    yrow = res.z[:n_orth] * cnorm / norms
    lam, theta = float(yrow[0]), float(yrow[1])
    beta, attained = _complete_betas(inst, lam, theta, cfg)
    y = np.concatenate([[lam], beta, [theta]])
    flags = ("zero_leakage_support",)
    if not attained:
        # without a strict interior the dual of A is approached, not
        # attained; surface it instead of pretending otherwise
        flags = flags + ("dual_completion_unattained",)
    cfg_no_refine = SolverConfig(
        feas_tol=cfg.feas_tol,
        gap_tol=cfg.gap_tol,
        max_iter=cfg.max_iter,
        dual_floor=cfg.dual_floor,
        polish=cfg.polish,
        refine_duals=False,
    )
    return _finalize(inst, cfg_no_refine, s_full, q_full, y, res.iterations, flags=flags)


def _complete_betas(inst: SdrInstance, lam, theta, cfg):
    """Smallest beta_k >= 0 with A = W + lam H - sum beta_k G_k - theta I <= 0.

    At the zero-leakage corner the ER rows are degenerate and their duals
    are not pinned by complementarity, so the minimal dual-feasible
    completion is chosen (itself a tiny SDP, solved by the same core).
    When no finite completion exists (dual not attained without a strict
    interior) this returns zeros and reports non-attainment.
    """
    m, k = inst.m, inst.k
    a0 = _hermitize(inst.obj_weights + lam * inst.h_outer - theta * np.eye(m))
    if float(np.linalg.eigvalsh(a0)[-1]) <= 0.0:
        return np.zeros(k), True
    emb = _embedding_matrix(m)
    svecdim = emb.shape[0]
    gmat = np.zeros((k + svecdim, k))
    hvec = np.zeros(k + svecdim)
    gmat[:k] = -np.eye(k)
    for j in range(k):
        gmat[k:, j] = -conic.svec(real_embedding(inst.g_outers[j]))
    hvec[k:] = -conic.svec(real_embedding(a0))
    scale = max(float(np.linalg.norm(hvec)), 1.0)
    res = conic.solve_conic(
        np.ones(k),
        gmat,
        hvec / scale,
        conic.ConeDims(nonneg=k, psd=(2 * m,)),
        feas_tol=cfg.feas_tol,
        gap_tol=cfg.gap_tol,
        max_iter=cfg.max_iter,
    )
    if res.status == "optimal":
        return np.maximum(res.x * scale, 0.0), True
    return np.zeros(k), False


def kkt_matrices(inst: SdrInstance, sol: SdrSolution) -> KktMatrices:
    """A, B and D* assembled from the returned dual variables."""
    if sol.status != "optimal":
        raise SolverStateError(
            f"KKT matrices require an optimal solution, got status {sol.status!r}"
        )
    a, b, d_star = _kkt_from_duals(inst, sol.lam, sol.beta, sol.theta)
    return KktMatrices(a=a, b=b, d_star=d_star)


# --- feasibility probe ------------------------------------------------------


def gamma_upper_bound(params: SystemParams, ch: ChannelSet) -> float:
    """Maximum achievable IR SINR: full power on the matched beam, no AN."""
    return params.p_bar * float(np.sum(np.abs(ch.h) ** 2)) / params.sigma0_sq


def gamma_grid(params: SystemParams, ch: ChannelSet, r_bar: float, n: int) -> np.ndarray:
    """Logarithmic gamma0 grid over [2^rbar - 1, gamma_cap]."""
    hi = gamma_upper_bound(params, ch)
    lo = math.pow(2.0, r_bar) - 1.0
    if lo >= hi:
        return np.array([hi])
    if lo <= 0.0:
        floor = hi * 1e-9
        grid = np.geomspace(floor, hi, max(n - 1, 1))
        return np.concatenate([[0.0], grid])
    return np.geomspace(lo, hi, n)


def _feasible_at(params, ch, r_bar, cfg, n_gamma):
    probe = SystemParams(
        m=params.m, k=params.k, p_bar=params.p_bar, sigma0_sq=params.sigma0_sq,
        sigma_sq=params.sigma_sq, zeta=params.zeta, mu=params.mu, r_bar=r_bar,
    )
    for gamma0 in gamma_grid(probe, ch, r_bar, n_gamma):
        inst = build_instance(probe, ch, gamma0)
        sol = solve_sdr(inst, cfg)
        if sol.status == "optimal":
            return True
    return False


def check_feasibility(
    params: SystemParams,
    ch: ChannelSet,
    cfg: SolverConfig | None = None,
    n_gamma: int = 100,
    bisect_tol: float = 1e-3,
) -> FeasibilityReport:
    """Bisection on the secrecy target over [0, IR capacity].

    A candidate target is declared feasible when some gamma0 on the search
    grid yields a feasible relaxation; the grid density and bisection
    tolerance bound the error in r_max.  Solver failures at single grid
    points count as infeasible for that point (conservative).  The
    configured target params.r_bar is probed directly, so the returned
    verdict is exact for it and consistent with the returned r_max.
    """
    cfg = cfg or SolverConfig()
    ch.validate_against(params)
    r_cap = math.log1p(gamma_upper_bound(params, ch)) / _LN2

    # the full-power max-energy beam needs no solver and gives a floor
    inst0 = build_instance(
        SystemParams(
            m=params.m, k=params.k, p_bar=params.p_bar, sigma0_sq=params.sigma0_sq,
            sigma_sq=params.sigma_sq, zeta=params.zeta, mu=params.mu, r_bar=0.0,
        ),
        ch,
        0.0,
    )
    lo = max(0.0, inst0.eta_rate_ceiling())
    hi = r_cap

    target_feasible = None
    if params.r_bar > r_cap:
        target_feasible = False
    elif params.r_bar <= lo:
        target_feasible = True
    else:
        target_feasible = _feasible_at(params, ch, params.r_bar, cfg, n_gamma)
        if target_feasible:
            lo = max(lo, params.r_bar)
        else:
            hi = min(hi, params.r_bar)

    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if _feasible_at(params, ch, mid, cfg, n_gamma):
            lo = mid
        else:
            hi = mid
    return FeasibilityReport(feasible=bool(target_feasible), r_max=lo)


# --- debug dump -------------------------------------------------------------


def dump_instance(inst: SdrInstance, stream):
    """Plain-text listing of the conic program (dense row-major matrices)
    for cross-checking against an external solver."""

    def write_mat(name, mat):
        stream.write(f"{name} rows {mat.shape[0]} cols {mat.shape[1]}\n")
        for row in np.asarray(mat):
            stream.write(
                " ".join(f"{v.real:.17g}{v.imag:+.17g}j" for v in row) + "\n"
            )

    stream.write("sdr-instance version 1\n")
    stream.write(
        f"m {inst.m} k {inst.k} gamma0 {inst.gamma0:.17g} gamma_e {inst.gamma_e:.17g}\n"
    )
    stream.write(
        f"sigma0_sq {inst.sigma0_sq:.17g} p_bar {inst.p_bar:.17g} sigma_sq "
        + " ".join(f"{v:.17g}" for v in inst.sigma_sq)
        + "\n"
    )
    stream.write("objective maximize Tr(W S) + Tr(W Q)\n")
    write_mat("W", inst.obj_weights)
    stream.write("constraint Tr(H S) - gamma0 Tr(H Q) >= gamma0 sigma0_sq\n")
    write_mat("H", inst.h_outer)
    for k in range(inst.k):
        stream.write(
            f"constraint Tr(G{k} S) - gamma_e Tr(G{k} Q) <= gamma_e sigma_sq[{k}]\n"
        )
        write_mat(f"G{k}", inst.g_outers[k])
    stream.write("constraint Tr(S) + Tr(Q) <= p_bar\n")
    stream.write("constraint S >= 0, Q >= 0\n")
