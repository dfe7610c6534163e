"""Self-contained dense conic interior-point solver.

Solves the pair

    (P)  minimize    c'x                 (D)  maximize  -h'z
         subject to  Gx + s = h               subject to G'z + c = 0
                     s in K                              z in K

where K is a product of a nonnegative orthant and dense PSD blocks.
PSD blocks are packed in "svec" coordinates (lower triangle, off-diagonal
entries scaled by sqrt(2) so the packing is an isometry).

The algorithm is a homogeneous self-dual embedding driven by
Nesterov-Todd scaling with Mehrotra predictor-corrector steps; it returns
either an optimal primal/dual pair or an infeasibility certificate.  The
Newton system is reduced through half-scaled variables (only W^{+-1} is
ever applied, never W^2) and polished by iterative refinement of the full
KKT system, which keeps directions accurate down to gaps near 1e-12.
Everything is dense and aimed at small problems, where one factorization
per iteration is trivially cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["ConeDims", "ConicSolution", "solve_conic", "svec", "smat"]

_SQRT2 = np.sqrt(2.0)
_TRIL_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
_PACK_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _tril(n: int):
    if n not in _TRIL_CACHE:
        i, j = np.tril_indices(n)
        scale = np.where(i == j, 1.0, _SQRT2)
        _TRIL_CACHE[n] = (i, j, scale)
    return _TRIL_CACHE[n]


def _pack_mats(n: int):
    """(unpack, pack) with unpack @ svec = mat.ravel() and
    pack @ mat.ravel() = svec, for batched congruence transforms."""
    if n not in _PACK_CACHE:
        i, j, scale = _tril(n)
        nsv = i.size
        unpack = np.zeros((n * n, nsv))
        pack = np.zeros((nsv, n * n))
        for q in range(nsv):
            a, b = int(i[q]), int(j[q])
            if a == b:
                unpack[a * n + b, q] = 1.0
                pack[q, a * n + b] = 1.0
            else:
                unpack[a * n + b, q] = 1.0 / _SQRT2
                unpack[b * n + a, q] = 1.0 / _SQRT2
                pack[q, a * n + b] = _SQRT2
        _PACK_CACHE[n] = (unpack, pack)
    return _PACK_CACHE[n]


def svec(x: np.ndarray) -> np.ndarray:
    """Pack a symmetric matrix; <svec(A), svec(B)> = Tr(AB)."""
    n = x.shape[0]
    i, j, scale = _tril(n)
    return x[i, j] * scale


def smat(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    i, j, scale = _tril(n)
    x = np.zeros((n, n))
    vals = v / scale
    x[i, j] = vals
    x[j, i] = vals
    return x


@dataclass(frozen=True)
class ConeDims:
    """Orthant size plus PSD block orders, in slack order."""

    nonneg: int = 0
    psd: tuple = ()

    def __post_init__(self):
        if self.nonneg < 0 or any(n <= 0 for n in self.psd):
            raise ValidationError("invalid cone dimensions")
        object.__setattr__(self, "psd", tuple(int(n) for n in self.psd))

    @property
    def packed_dim(self) -> int:
        return self.nonneg + sum(n * (n + 1) // 2 for n in self.psd)

    @property
    def degree(self) -> int:
        return self.nonneg + sum(self.psd)

    def psd_slices(self):
        out = []
        off = self.nonneg
        for n in self.psd:
            size = n * (n + 1) // 2
            out.append((slice(off, off + size), n))
            off += size
        return out


@dataclass
class ConicSolution:
    status: str
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    relative_gap: float
    iterations: int
    tau: float = 0.0
    kappa: float = 0.0
    certificate: np.ndarray | None = None
    message: str = ""


def _identity_element(dims: ConeDims) -> np.ndarray:
    e = np.zeros(dims.packed_dim)
    e[: dims.nonneg] = 1.0
    for sl, n in dims.psd_slices():
        e[sl] = svec(np.eye(n))
    return e


class _Scaling:
    """Per-iteration NT scaling for the product cone.

    For each PSD block with slack S and dual Z the scaling matrix
    W = R R' satisfies W Z W = S; the scaled point
    lambda = R^{-1} S R^{-T} = R' Z R is diagonal with the singular
    values of L_z' L_s.  Phi_s(u) = R^{-1} U R^{-T} maps s-side vectors
    to the scaled space, Phi_z(u) = R' U R maps z-side vectors, and
    Phi_s(s) = Phi_z(z) = lambda.
    """

    def __init__(self, s, z, dims: ConeDims):
        self.dims = dims
        l = dims.nonneg
        self.w_orth = np.sqrt(s[:l] / z[:l]) if l else np.zeros(0)
        self.lam = np.zeros(dims.packed_dim)
        if l:
            self.lam[:l] = np.sqrt(s[:l] * z[:l])
        self.blocks = []
        for sl, n in dims.psd_slices():
            ls = np.linalg.cholesky(smat(s[sl], n))
            lz = np.linalg.cholesky(smat(z[sl], n))
            u, d, vt = np.linalg.svd(lz.T @ ls)
            dh = np.sqrt(d)
            r = ls @ vt.T / dh
            ri = np.linalg.solve(r, np.eye(n))
            self.blocks.append((sl, n, r, ri, d))
            self.lam[sl] = svec(np.diag(d))

    def scale_s(self, v):
        out = np.empty_like(v)
        l = self.dims.nonneg
        out[:l] = v[:l] / self.w_orth
        for sl, n, r, ri, _ in self.blocks:
            out[sl] = svec(ri @ smat(v[sl], n) @ ri.T)
        return out

    def scale_s_columns(self, g):
        """Phi_s applied to every column of g at once."""
        out = np.empty_like(g)
        l = self.dims.nonneg
        out[:l] = g[:l] / self.w_orth[:, None]
        p = g.shape[1]
        for sl, n, r, ri, _ in self.blocks:
            unpack, pack = _pack_mats(n)
            mats = (unpack @ g[sl]).reshape(n, n, p).transpose(2, 0, 1)
            scaled = ri @ mats @ ri.T
            out[sl] = pack @ scaled.transpose(1, 2, 0).reshape(n * n, p)
        return out

    def unscale_s(self, v):
        out = np.empty_like(v)
        l = self.dims.nonneg
        out[:l] = v[:l] * self.w_orth
        for sl, n, r, ri, _ in self.blocks:
            out[sl] = svec(r @ smat(v[sl], n) @ r.T)
        return out

    def scale_z(self, v):
        out = np.empty_like(v)
        l = self.dims.nonneg
        out[:l] = v[:l] * self.w_orth
        for sl, n, r, ri, _ in self.blocks:
            out[sl] = svec(r.T @ smat(v[sl], n) @ r)
        return out

    def unscale_z(self, v):
        out = np.empty_like(v)
        l = self.dims.nonneg
        out[:l] = v[:l] / self.w_orth
        for sl, n, r, ri, _ in self.blocks:
            out[sl] = svec(ri.T @ smat(v[sl], n) @ ri)
        return out

    def lam_jordan_solve(self, d):
        """Solve lambda o x = d (Jordan product) for x; lambda diagonal."""
        out = np.empty_like(d)
        l = self.dims.nonneg
        out[:l] = d[:l] / self.lam[:l]
        for sl, n, r, ri, dvals in self.blocks:
            dm = smat(d[sl], n)
            denom = 0.5 * (dvals[:, None] + dvals[None, :])
            out[sl] = svec(dm / denom)
        return out

    def max_step(self, dv_scaled):
        """Largest alpha keeping lambda + alpha*dv in the cone, dv in the
        scaled space (shared by the s and z sides)."""
        alpha = np.inf
        l = self.dims.nonneg
        if l:
            neg = dv_scaled[:l] < 0
            if np.any(neg):
                alpha = min(alpha, float(np.min(-self.lam[:l][neg] / dv_scaled[:l][neg])))
        for sl, n, r, ri, dvals in self.blocks:
            dm = smat(dv_scaled[sl], n)
            root = 1.0 / np.sqrt(dvals)
            m = root[:, None] * dm * root[None, :]
            emin = float(np.linalg.eigvalsh(m)[0])
            if emin < 0:
                alpha = min(alpha, -1.0 / emin)
        return alpha


def _jordan(u, v, dims: ConeDims):
    out = np.empty_like(u)
    l = dims.nonneg
    out[:l] = u[:l] * v[:l]
    for sl, n in dims.psd_slices():
        a = smat(u[sl], n)
        b = smat(v[sl], n)
        out[sl] = svec(0.5 * (a @ b + b @ a))
    return out


def _factor(mat):
    try:
        return np.linalg.cholesky(mat), True
    except np.linalg.LinAlgError:
        jitter = 1e-14 * max(1.0, float(np.trace(mat)) / mat.shape[0])
        try:
            return np.linalg.cholesky(mat + jitter * np.eye(mat.shape[0])), True
        except np.linalg.LinAlgError:
            return mat, False


def _solve_factored(chol, rhs):
    if chol[1]:
        y = np.linalg.solve(chol[0], rhs)
        return np.linalg.solve(chol[0].T, y)
    return np.linalg.solve(chol[0], rhs)


def solve_conic(
    c,
    g,
    h,
    dims: ConeDims,
    feas_tol: float = 1e-8,
    gap_tol: float = 1e-8,
    max_iter: int = 200,
    step_frac: float = 0.99,
) -> ConicSolution:
    """Run the homogeneous self-dual interior-point iteration."""
    c = np.asarray(c, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    p = c.shape[0]
    m = dims.packed_dim
    if g.shape != (m, p) or h.shape != (m,):
        raise ValidationError(
            f"shape mismatch: G{g.shape}, c({p},), h{h.shape}, cone packed dim {m}"
        )

    e = _identity_element(dims)
    nu = dims.degree + 1.0
    x = np.zeros(p)
    s = e.copy()
    z = e.copy()
    tau, kappa = 1.0, 1.0

    hnorm = max(1.0, float(np.linalg.norm(h)))
    cnorm = max(1.0, float(np.linalg.norm(c)))

    best = None
    message = "iteration limit reached"
    it = 0

    for it in range(1, max_iter + 1):
        rx = g.T @ z + c * tau
        rz = g @ x + s - h * tau
        rtau = float(c @ x + h @ z + kappa)
        mu = max((float(s @ z) + tau * kappa) / nu, 1e-300)

        # de-homogenized convergence metrics
        xh, sh, zh = x / tau, s / tau, z / tau
        pres = float(np.linalg.norm(g @ xh + sh - h)) / hnorm
        dres = float(np.linalg.norm(g.T @ zh + c)) / cnorm
        pobj = float(c @ xh)
        dobj = float(-h @ zh)
        gap = float(sh @ zh)
        relgap = gap / max(1.0, abs(pobj), abs(dobj))

        cand = ConicSolution(
            status="optimal",
            x=xh,
            s=sh,
            z=zh,
            primal_objective=pobj,
            dual_objective=dobj,
            primal_residual=pres,
            dual_residual=dres,
            relative_gap=relgap,
            iterations=it - 1,
            tau=tau,
            kappa=kappa,
        )
        score = max(pres, dres, relgap)
        if best is None or score < best[0]:
            best = (score, cand)

        if pres <= feas_tol and dres <= feas_tol and relgap <= gap_tol:
            return cand

        # infeasibility certificates
        hz = float(h @ z)
        if hz < 0.0:
            zc = z / -hz
            if float(np.linalg.norm(g.T @ zc)) <= feas_tol:
                return ConicSolution(
                    status="primal_infeasible",
                    x=xh,
                    s=sh,
                    z=zc,
                    primal_objective=np.nan,
                    dual_objective=np.nan,
                    primal_residual=pres,
                    dual_residual=float(np.linalg.norm(g.T @ zc)),
                    relative_gap=np.nan,
                    iterations=it - 1,
                    tau=tau,
                    kappa=kappa,
                    certificate=zc,
                    message="dual improving ray found (h'z < 0, G'z = 0, z in K)",
                )
        cx = float(c @ x)
        if cx < 0.0:
            ray = x / -cx
            if float(np.linalg.norm(g @ ray + s / -cx)) <= feas_tol:
                return ConicSolution(
                    status="dual_infeasible",
                    x=ray,
                    s=s / -cx,
                    z=zh,
                    primal_objective=np.nan,
                    dual_objective=np.nan,
                    primal_residual=float(np.linalg.norm(g @ ray + s / -cx)),
                    dual_residual=dres,
                    relative_gap=np.nan,
                    iterations=it - 1,
                    tau=tau,
                    kappa=kappa,
                    certificate=ray,
                    message="primal improving ray found (c'x < 0, Gx + s = 0)",
                )

        try:
            scal = _Scaling(s, z, dims)
        except np.linalg.LinAlgError:
            message = "scaling factorization failed (iterate left the cone)"
            break

        # half-scaled data: gs = Phi_s(G), hs = Phi_s(h); the reduced matrix
        # gs'gs only ever sees condition ~1/mu instead of 1/mu^2
        gs = scal.scale_s_columns(g)
        hs = scal.scale_s(h)
        mred = gs.T @ gs
        mred = 0.5 * (mred + mred.T)
        chol = _factor(mred)
        if not chol[1] and not np.all(np.isfinite(chol[0])):
            message = "reduced system factorization failed"
            break

        x2 = _solve_factored(chol, gs.T @ hs - c)
        zbar2 = gs @ x2 - hs
        denom = float(c @ x2 + hs @ zbar2 - kappa / tau)

        def solve_once(bx, bz, btau, bs, bkappa):
            """Direct solve of the linearized homogeneous KKT system

                G'dz + c dtau               = bx
                G dx + ds - h dtau          = bz
                c'dx + h'dz + dkappa        = btau
                lam o (Phi_z dz + Phi_s ds) = bs
                kappa dtau + tau dkappa     = bkappa

            returning both unscaled (dx, dz, ds, dtau, dkappa) and the
            half-scaled (dzbar, dsbar) used for step-length computation.
            """
            q = scal.lam_jordan_solve(bs) - scal.scale_s(bz)
            x1 = _solve_factored(chol, bx - gs.T @ q)
            zbar1 = q + gs @ x1
            numer = btau - float(c @ x1 + hs @ zbar1) - bkappa / tau
            dtau = numer / denom if abs(denom) > 1e-300 else 0.0
            dx = x1 + dtau * x2
            dzbar = zbar1 + dtau * zbar2
            dsbar = scal.lam_jordan_solve(bs) - dzbar
            dz = scal.unscale_z(dzbar)
            ds = scal.unscale_s(dsbar)
            dkappa = (bkappa - kappa * dtau) / tau
            return [dx, dz, ds, dtau, dkappa, dzbar, dsbar]

        def newton_residuals(bx, bz, btau, bs, bkappa, d):
            dx, dz, ds, dtau, dkappa = d[:5]
            r1 = bx - (g.T @ dz + c * dtau)
            r2 = bz - (g @ dx + ds - h * dtau)
            r3 = btau - (float(c @ dx + h @ dz) + dkappa)
            r4 = bs - _jordan(scal.lam, scal.scale_z(dz) + scal.scale_s(ds), dims)
            r5 = bkappa - (kappa * dtau + tau * dkappa)
            return r1, r2, r3, r4, r5

        def _res_norm(res):
            return max(
                float(np.linalg.norm(res[0])),
                float(np.linalg.norm(res[1])),
                abs(res[2]),
                float(np.linalg.norm(res[3])),
                abs(res[4]),
            )

        def directions(bx, bz, btau, bs, bkappa, refine=4):
            d = solve_once(bx, bz, btau, bs, bkappa)
            rhs_scale = max(
                1.0,
                float(np.linalg.norm(bz)),
                float(np.linalg.norm(bx)),
                float(np.linalg.norm(bs)),
            )
            res = newton_residuals(bx, bz, btau, bs, bkappa, d)
            err = _res_norm(res)
            for _ in range(refine):
                if err <= 1e-13 * rhs_scale:
                    break
                corr = solve_once(*res)
                cand = [a + b for a, b in zip(d, corr)]
                res_new = newton_residuals(bx, bz, btau, bs, bkappa, cand)
                err_new = _res_norm(res_new)
                if err_new >= err:
                    break
                d, res, err = cand, res_new, err_new
            return d

        lam_sq = _jordan(scal.lam, scal.lam, dims)

        # predictor (affine) direction
        da = directions(-rx, -rz, -rtau, -lam_sq, -tau * kappa)
        dxa, dza, dsa, dtaua, dkapa, dzbar_a, dsbar_a = da

        alpha_aff = min(
            1.0,
            scal.max_step(dsbar_a),
            scal.max_step(dzbar_a),
            -tau / dtaua if dtaua < 0 else np.inf,
            -kappa / dkapa if dkapa < 0 else np.inf,
        )
        mu_aff = (
            float((s + alpha_aff * dsa) @ (z + alpha_aff * dza))
            + (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkapa)
        ) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # combined (corrector) direction
        d_s = sigma * mu * e - lam_sq - _jordan(dsbar_a, dzbar_a, dims)
        d_kappa = sigma * mu - tau * kappa - dtaua * dkapa
        fac = 1.0 - sigma
        dc = directions(-fac * rx, -fac * rz, -fac * rtau, d_s, d_kappa)
        dx, dz, ds, dtau, dkappa, dzbar, dsbar = dc

        alpha = min(
            1.0,
            step_frac
            * min(
                scal.max_step(dsbar),
                scal.max_step(dzbar),
                -tau / dtau if dtau < 0 else np.inf,
                -kappa / dkappa if dkappa < 0 else np.inf,
            ),
        )

        if not np.isfinite(alpha) or alpha <= 1e-13:
            message = "step length collapsed"
            break

        x = x + alpha * dx
        z = z + alpha * dz
        s = s + alpha * ds
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa

        if tau <= 1e-300 or not np.isfinite(tau):
            message = "tau collapsed without a certificate"
            break

    out = best[1] if best is not None else ConicSolution(
        status="numerical_failure",
        x=x,
        s=s,
        z=z,
        primal_objective=np.nan,
        dual_objective=np.nan,
        primal_residual=np.inf,
        dual_residual=np.inf,
        relative_gap=np.inf,
        iterations=it,
    )
    out.status = "numerical_failure"
    out.iterations = it
    out.message = message
    return out
