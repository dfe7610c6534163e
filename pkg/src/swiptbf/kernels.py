"""Hot numeric kernels: numba-compiled loops with pure-numpy fallbacks.

The brute-force beam-grid oracle and the Scheme II power scan spend their
time in dense scalar loops; each kernel here exists twice, as an @njit
loop and as a vectorized numpy implementation.  Set SWIPTBF_NO_NUMBA=1 to
force the numpy path (the results are identical); see
benchmarks/bench_kernels.py for a timing comparison of the two.

All two-antenna beam kernels work in a reduced real parameterization:
after rotating the IR channel onto the first axis and absorbing entry
phases, a unit beam is (theta, c) with

    a(theta)    = cos^2(theta) * H1          (power towards the IR)
    b(theta, c) = cos^2(theta) * G1 + sin^2(theta) * G2
                  + 2 cos(theta) sin(theta) * sqrt(G1 G2) * c

where c = cos(relative phase) in [-1, 1], H1 = |h|^2 and G1, G2 are the
squared ER-channel components.  This exploits the phase invariance of
every metric and leaves a 5-dimensional search space
(theta_v, c_v, theta_w, c_w, power split).
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "numba_enabled",
    "beam_tables",
    "prune_frontier",
    "split_search",
    "refine_beams",
    "scheme2_rate_scan",
]

_DISABLED = os.environ.get("SWIPTBF_NO_NUMBA", "") not in ("", "0")
if not _DISABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLED = True

if _DISABLED:  # pragma: no cover - exercised via the env flag in tests
    def _njit(*args, **kwargs):
        def deco(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return deco


def numba_enabled() -> bool:
    return not _DISABLED


# --- (a, b) gain tables ----------------------------------------------------


def _beam_tables_py(theta, cosphi, h1, g1, g2):
    ct = np.cos(theta)[:, None]
    st = np.sin(theta)[:, None]
    cross = 2.0 * math.sqrt(g1 * g2)
    a = (h1 * ct * ct) * np.ones_like(cosphi)[None, :]
    b = g1 * ct * ct + g2 * st * st + cross * ct * st * cosphi[None, :]
    return a.ravel(), b.ravel()


@_njit(cache=True)
def _beam_tables_nb(theta, cosphi, h1, g1, g2):
    n_t = theta.shape[0]
    n_c = cosphi.shape[0]
    a = np.empty(n_t * n_c)
    b = np.empty(n_t * n_c)
    cross = 2.0 * math.sqrt(g1 * g2)
    for i in range(n_t):
        ct = math.cos(theta[i])
        st = math.sin(theta[i])
        av = h1 * ct * ct
        base = g1 * ct * ct + g2 * st * st
        coef = cross * ct * st
        for j in range(n_c):
            a[i * n_c + j] = av
            b[i * n_c + j] = base + coef * cosphi[j]
    return a, b


def beam_tables(theta, cosphi, h1, g1, g2):
    """(a, b) gains for every (theta, c) pair, flattened row-major."""
    if numba_enabled():
        return _beam_tables_nb(theta, cosphi, h1, g1, g2)
    return _beam_tables_py(theta, cosphi, h1, g1, g2)


# --- dominance pruning -----------------------------------------------------


def _prune_frontier_py(a, b, n_bins, keep_max_a):
    bmax = float(np.max(b)) if b.size else 0.0
    if bmax <= 0.0:
        bmax = 1.0
    bins = np.minimum((b / bmax * n_bins).astype(np.int64), n_bins - 1)
    key = a if keep_max_a else -a
    order = np.lexsort((key, bins))
    sorted_bins = bins[order]
    # last element of each bin group carries the best key
    boundaries = np.flatnonzero(np.diff(sorted_bins)) if sorted_bins.size else np.array([], dtype=int)
    last = np.concatenate([boundaries, [sorted_bins.size - 1]]) if sorted_bins.size else boundaries
    idx = order[last]
    return a[idx], b[idx], idx


@_njit(cache=True)
def _prune_frontier_nb(a, b, n_bins, keep_max_a):
    bmax = 0.0
    for i in range(b.shape[0]):
        if b[i] > bmax:
            bmax = b[i]
    if bmax <= 0.0:
        bmax = 1.0
    best = np.full(n_bins, -1, dtype=np.int64)
    for i in range(a.shape[0]):
        j = int(b[i] / bmax * n_bins)
        if j >= n_bins:
            j = n_bins - 1
        k = best[j]
        if k < 0:
            best[j] = i
        elif keep_max_a:
            if a[i] > a[k]:
                best[j] = i
        else:
            if a[i] < a[k]:
                best[j] = i
    count = 0
    for j in range(n_bins):
        if best[j] >= 0:
            count += 1
    a_out = np.empty(count)
    b_out = np.empty(count)
    idx = np.empty(count, dtype=np.int64)
    pos = 0
    for j in range(n_bins):
        if best[j] >= 0:
            i = best[j]
            a_out[pos] = a[i]
            b_out[pos] = b[i]
            idx[pos] = i
            pos += 1
    return a_out, b_out, idx


def prune_frontier(a, b, n_bins, keep_max_a):
    """Bin candidates by b and keep the dominant a per bin.

    For the information beam larger a never hurts (keep_max_a=True); for
    the energy beam smaller a never hurts (keep_max_a=False).  Pruned
    points are exactly dominated up to the bin width in b; the survivors
    keep their exact (a, b) values.
    """
    if numba_enabled():
        return _prune_frontier_nb(a, b, int(n_bins), bool(keep_max_a))
    return _prune_frontier_py(a, b, int(n_bins), bool(keep_max_a))


# --- main split search -----------------------------------------------------


def _split_search_py(av, bv, aw, bw, t_grid, p_bar, sigma0, sigma1, two_r, zeta_mu):
    best_e = -np.inf
    best_e_idx = (-1, -1, -1)
    best_ratio = -np.inf
    best_r_idx = (-1, -1, -1)
    sv = av[:, None]
    lv = bv[:, None]
    sw = aw[None, :]
    lw = bw[None, :]
    for it, t in enumerate(t_grid):
        pv = t * p_bar
        pw = (1.0 - t) * p_bar
        sinr0 = pv * sv / (pw * sw + sigma0)
        sinr1 = pv * lv / (pw * lw + sigma1)
        ratio = (1.0 + sinr0) / (1.0 + sinr1)
        energy = zeta_mu * (pv * lv + pw * lw)
        feas = ratio >= two_r
        if np.any(feas):
            masked = np.where(feas, energy, -np.inf)
            k = int(np.argmax(masked))
            if masked.flat[k] > best_e:
                best_e = float(masked.flat[k])
                best_e_idx = (k // aw.shape[0], k % aw.shape[0], it)
        k = int(np.argmax(ratio))
        if ratio.flat[k] > best_ratio:
            best_ratio = float(ratio.flat[k])
            best_r_idx = (k // aw.shape[0], k % aw.shape[0], it)
    return best_e, best_e_idx, best_ratio, best_r_idx


@_njit(cache=True)
def _split_search_nb(av, bv, aw, bw, t_grid, p_bar, sigma0, sigma1, two_r, zeta_mu):
    best_e = -np.inf
    be_v, be_w, be_t = -1, -1, -1
    best_ratio = -np.inf
    br_v, br_w, br_t = -1, -1, -1
    for it in range(t_grid.shape[0]):
        t = t_grid[it]
        pv = t * p_bar
        pw = (1.0 - t) * p_bar
        for i in range(av.shape[0]):
            num0 = pv * av[i]
            num1 = pv * bv[i]
            ev = pv * bv[i]
            for j in range(aw.shape[0]):
                sinr0 = num0 / (pw * aw[j] + sigma0)
                sinr1 = num1 / (pw * bw[j] + sigma1)
                ratio = (1.0 + sinr0) / (1.0 + sinr1)
                if ratio > best_ratio:
                    best_ratio = ratio
                    br_v, br_w, br_t = i, j, it
                if ratio >= two_r:
                    energy = zeta_mu * (ev + pw * bw[j])
                    if energy > best_e:
                        best_e = energy
                        be_v, be_w, be_t = i, j, it
    return best_e, (be_v, be_w, be_t), best_ratio, (br_v, br_w, br_t)


def split_search(av, bv, aw, bw, t_grid, p_bar, sigma0, sigma1, two_r, zeta_mu):
    """Exhaustive search over (v candidate) x (w candidate) x (power split).

    Returns the best feasible weighted energy with its index triple and
    the best secrecy ratio (1+SINR0)/(1+SINR1) with its index triple.
    """
    if numba_enabled():
        return _split_search_nb(av, bv, aw, bw, t_grid, p_bar, sigma0, sigma1, two_r, zeta_mu)
    return _split_search_py(av, bv, aw, bw, t_grid, p_bar, sigma0, sigma1, two_r, zeta_mu)


# --- local 5-d refinement ---------------------------------------------------


@_njit(cache=True)
def _refine_nb(h1, g1, g2, center, widths, p_bar, sigma0, sigma1, two_r,
               zeta_mu, n_steps, n_passes, maximize_energy):
    cross = 2.0 * math.sqrt(g1 * g2)
    thv, cv, thw, cw, t = center[0], center[1], center[2], center[3], center[4]
    wv, wc, ww, wcw, wt = widths[0], widths[1], widths[2], widths[3], widths[4]
    half_pi = 0.5 * math.pi
    best = -np.inf
    for _ in range(n_passes):
        b_thv, b_cv, b_thw, b_cw, b_t = thv, cv, thw, cw, t
        for i0 in range(n_steps):
            tv = thv + wv * (2.0 * i0 / (n_steps - 1) - 1.0)
            if tv < 0.0 or tv > half_pi:
                continue
            for i1 in range(n_steps):
                xcv = cv + wc * (2.0 * i1 / (n_steps - 1) - 1.0)
                if xcv < -1.0 or xcv > 1.0:
                    continue
                for i2 in range(n_steps):
                    tw = thw + ww * (2.0 * i2 / (n_steps - 1) - 1.0)
                    if tw < 0.0 or tw > half_pi:
                        continue
                    for i3 in range(n_steps):
                        xcw = cw + wcw * (2.0 * i3 / (n_steps - 1) - 1.0)
                        if xcw < -1.0 or xcw > 1.0:
                            continue
                        for i4 in range(n_steps):
                            xt = t + wt * (2.0 * i4 / (n_steps - 1) - 1.0)
                            if xt < 0.0 or xt > 1.0:
                                continue
                            ctv = math.cos(tv)
                            stv = math.sin(tv)
                            ctw = math.cos(tw)
                            stw = math.sin(tw)
                            av = h1 * ctv * ctv
                            bv = g1 * ctv * ctv + g2 * stv * stv + cross * ctv * stv * xcv
                            aw = h1 * ctw * ctw
                            bw = g1 * ctw * ctw + g2 * stw * stw + cross * ctw * stw * xcw
                            pv = xt * p_bar
                            pw = (1.0 - xt) * p_bar
                            sinr0 = pv * av / (pw * aw + sigma0)
                            sinr1 = pv * bv / (pw * bw + sigma1)
                            ratio = (1.0 + sinr0) / (1.0 + sinr1)
                            if maximize_energy:
                                if ratio >= two_r:
                                    val = zeta_mu * (pv * bv + pw * bw)
                                    if val > best:
                                        best = val
                                        b_thv, b_cv, b_thw, b_cw, b_t = tv, xcv, tw, xcw, xt
                            else:
                                if ratio > best:
                                    best = ratio
                                    b_thv, b_cv, b_thw, b_cw, b_t = tv, xcv, tw, xcw, xt
        thv, cv, thw, cw, t = b_thv, b_cv, b_thw, b_cw, b_t
        wv *= 0.6
        wc *= 0.6
        ww *= 0.6
        wcw *= 0.6
        wt *= 0.6
    return best, np.array([thv, cv, thw, cw, t])


def _refine_py(h1, g1, g2, center, widths, p_bar, sigma0, sigma1, two_r,
               zeta_mu, n_steps, n_passes, maximize_energy):
    cross = 2.0 * math.sqrt(g1 * g2)
    cen = np.asarray(center, dtype=float).copy()
    wid = np.asarray(widths, dtype=float).copy()
    offsets = 2.0 * np.arange(n_steps) / (n_steps - 1) - 1.0
    lo = np.array([0.0, -1.0, 0.0, -1.0, 0.0])
    hi = np.array([0.5 * math.pi, 1.0, 0.5 * math.pi, 1.0, 1.0])
    best = -np.inf
    for _ in range(n_passes):
        axes = [cen[d] + wid[d] * offsets for d in range(5)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        ok = np.all((pts >= lo[None, :]) & (pts <= hi[None, :]), axis=1)
        pts = pts[ok]
        ctv = np.cos(pts[:, 0])
        stv = np.sin(pts[:, 0])
        ctw = np.cos(pts[:, 2])
        stw = np.sin(pts[:, 2])
        av = h1 * ctv**2
        bv = g1 * ctv**2 + g2 * stv**2 + cross * ctv * stv * pts[:, 1]
        aw = h1 * ctw**2
        bw = g1 * ctw**2 + g2 * stw**2 + cross * ctw * stw * pts[:, 3]
        pv = pts[:, 4] * p_bar
        pw = (1.0 - pts[:, 4]) * p_bar
        sinr0 = pv * av / (pw * aw + sigma0)
        sinr1 = pv * bv / (pw * bw + sigma1)
        ratio = (1.0 + sinr0) / (1.0 + sinr1)
        if maximize_energy:
            val = np.where(ratio >= two_r, zeta_mu * (pv * bv + pw * bw), -np.inf)
        else:
            val = ratio
        k = int(np.argmax(val))
        if val[k] > best:
            best = float(val[k])
            cen = pts[k].copy()
        wid *= 0.6
    return best, cen


def refine_beams(h1, g1, g2, center, widths, p_bar, sigma0, sigma1, two_r,
                 zeta_mu, n_steps=9, n_passes=40, maximize_energy=True):
    """Shrinking-window grid descent around a coarse-search winner."""
    center = np.asarray(center, dtype=float)
    widths = np.asarray(widths, dtype=float)
    if numba_enabled():
        return _refine_nb(h1, g1, g2, center, widths, p_bar, sigma0, sigma1,
                          two_r, zeta_mu, int(n_steps), int(n_passes),
                          bool(maximize_energy))
    return _refine_py(h1, g1, g2, center, widths, p_bar, sigma0, sigma1,
                      two_r, zeta_mu, int(n_steps), int(n_passes),
                      bool(maximize_energy))


# --- Scheme II power scan ----------------------------------------------------


def _scheme2_scan_py(p_grid, h_norm_sq, sigma0_sq, leak, an_gain, sigma_sq, p_bar):
    ln2 = math.log(2.0)
    p = p_grid[:, None]
    rate_ir = np.log1p(p_grid * h_norm_sq / sigma0_sq) / ln2
    denom = h_norm_sq * ((p_bar - p) * an_gain[None, :] + sigma_sq[None, :])
    rate_ev = np.log1p(p * leak[None, :] / denom) / ln2
    return rate_ir - np.max(rate_ev, axis=1)


@_njit(cache=True)
def _scheme2_scan_nb(p_grid, h_norm_sq, sigma0_sq, leak, an_gain, sigma_sq, p_bar):
    ln2 = math.log(2.0)
    out = np.empty(p_grid.shape[0])
    for i in range(p_grid.shape[0]):
        p = p_grid[i]
        rate_ir = math.log1p(p * h_norm_sq / sigma0_sq) / ln2
        worst = 0.0
        for k in range(leak.shape[0]):
            denom = h_norm_sq * ((p_bar - p) * an_gain[k] + sigma_sq[k])
            ev = math.log1p(p * leak[k] / denom) / ln2
            if ev > worst:
                worst = ev
        out[i] = rate_ir - worst
    return out


def scheme2_rate_scan(p_grid, h_norm_sq, sigma0_sq, leak, an_gain, sigma_sq, p_bar):
    """Secrecy rate of the matched-beam scheme at every candidate power.

    leak[k] = |h^H g_k|^2 and an_gain[k] = |u^H g_k|^2 for the null-space
    energy direction u; the IR term has no interference because u is
    orthogonal to h.
    """
    p_grid = np.asarray(p_grid, dtype=np.float64)
    leak = np.asarray(leak, dtype=np.float64)
    an_gain = np.asarray(an_gain, dtype=np.float64)
    sigma_sq = np.asarray(sigma_sq, dtype=np.float64)
    if numba_enabled():
        return _scheme2_scan_nb(p_grid, h_norm_sq, sigma0_sq, leak, an_gain, sigma_sq, p_bar)
    return _scheme2_scan_py(p_grid, h_norm_sq, sigma0_sq, leak, an_gain, sigma_sq, p_bar)
