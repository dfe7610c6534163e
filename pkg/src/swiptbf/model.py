"""Physical model: parameters, channels, beams and the metric formulas.

A transmitter with M antennas sends one information beam v0 and up to
d <= M energy beams w_i.  The information receiver (IR) sees channel h,
the K energy receivers (ERs) see channels g_k; every quantity below is
kept in linear units (Watts, Joules per unit slot).  dBm/dB conversion
happens only at the CLI boundary.

Metrics:

    SINR_ir   = |v0^H h|^2 / (sum_i |w_i^H h|^2 + sigma0^2)
    SINR_er_k = |v0^H g_k|^2 / (sum_i |w_i^H g_k|^2 + sigma_k^2)
    secrecy   = min_k log2(1 + SINR_ir) - log2(1 + SINR_er_k)   (unclamped)
    E_k       = zeta * (|v0^H g_k|^2 + sum_i |w_i^H g_k|^2)

The secrecy rate may be negative; clamping to zero is the caller's
concern so that thresholds compared through max(0, .) stay computable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

__all__ = [
    "SystemParams",
    "ChannelGenSpec",
    "ChannelSet",
    "BeamformingSolution",
    "Metrics",
    "generate_channels",
    "compute_sinrs",
    "compute_secrecy_rate",
    "compute_energy",
    "compute_metrics",
    "save_channels",
    "load_channels",
    "channels_to_dict",
    "channels_from_dict",
]

_LN2 = float(np.log(2.0))


def _readonly(a, dtype):
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SystemParams:
    """Static system description; everything in linear units.

    m: transmit antennas (> 1); k: number of energy receivers (>= 1);
    p_bar: sum transmit power budget [W]; sigma0_sq: IR noise power [W];
    sigma_sq: per-ER noise powers [W], length k; zeta: harvesting
    efficiency in (0, 1); mu: nonnegative energy weights, length k;
    r_bar: target secrecy rate [bits/s/Hz] (>= 0).
    """

    m: int
    k: int
    p_bar: float
    sigma0_sq: float
    sigma_sq: np.ndarray
    zeta: float
    mu: np.ndarray
    r_bar: float

    def __post_init__(self):
        if int(self.m) <= 1:
            raise ValidationError(f"need more than one Tx antenna, got M={self.m}")
        if int(self.k) < 1:
            raise ValidationError(f"need at least one energy receiver, got K={self.k}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "sigma_sq", _readonly(self.sigma_sq, np.float64))
        object.__setattr__(self, "mu", _readonly(self.mu, np.float64))
        if self.p_bar <= 0.0 or not np.isfinite(self.p_bar):
            raise ValidationError(f"power budget must be positive, got {self.p_bar}")
        if self.sigma0_sq <= 0.0:
            raise ValidationError("IR noise power must be positive")
        if self.sigma_sq.shape != (self.k,) or np.any(self.sigma_sq <= 0.0):
            raise ValidationError("need K positive ER noise powers")
        if not (0.0 < self.zeta < 1.0):
            raise ValidationError(f"harvesting efficiency must lie in (0,1), got {self.zeta}")
        if self.mu.shape != (self.k,) or np.any(self.mu < 0.0):
            raise ValidationError("need K nonnegative energy weights")
        if self.r_bar < 0.0 or not np.isfinite(self.r_bar):
            raise ValidationError(f"secrecy target must be >= 0, got {self.r_bar}")


@dataclass(frozen=True)
class ChannelGenSpec:
    """Rayleigh-fading generator: per-entry average powers plus a seed.

    Every ER must, on average, be stronger than the IR (rho_g_sq > rho_h_sq);
    that near/far asymmetry is what creates the eavesdropping problem.
    """

    rho_h_sq: float
    rho_g_sq: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "rho_g_sq", _readonly(self.rho_g_sq, np.float64))
        if self.rho_h_sq <= 0.0:
            raise ValidationError("IR average channel power must be positive")
        if np.any(self.rho_g_sq <= self.rho_h_sq):
            raise ValidationError(
                "every ER average channel power must exceed the IR's"
            )
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class ChannelSet:
    """IR channel h (length M) and ER channels g (K x M, row k is g_k)."""

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", _readonly(self.h, np.complex128))
        object.__setattr__(self, "g", _readonly(self.g, np.complex128))
        if self.h.ndim != 1 or self.g.ndim != 2 or self.g.shape[1] != self.h.shape[0]:
            raise ValidationError(
                f"inconsistent channel shapes h{self.h.shape}, g{self.g.shape}"
            )
        for arr in (self.h, self.g):
            if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
                raise ValidationError("channel entries must be finite")

    @property
    def m(self) -> int:
        return int(self.h.shape[0])

    @property
    def k(self) -> int:
        return int(self.g.shape[0])

    def g_matrix(self) -> np.ndarray:
        """The K x M matrix whose k-th row is g_k^H (so  G v = 0  means
        zero leakage of v towards every ER)."""
        return np.conj(self.g)

    def validate_against(self, params: SystemParams):
        if self.m != params.m or self.k != params.k:
            raise ValidationError(
                f"channel dimensions ({self.m}, {self.k}) do not match "
                f"system ({params.m}, {params.k})"
            )


@dataclass(frozen=True)
class BeamformingSolution:
    """Information beam v0 plus energy beams as columns of w (M x d)."""

    v0: np.ndarray
    w: np.ndarray
    scheme_tag: str = "optimal"

    def __post_init__(self):
        v0 = _readonly(self.v0, np.complex128)
        w = np.asarray(self.w, dtype=np.complex128)
        if w.ndim == 1:
            w = w[:, None] if w.size else w.reshape(v0.shape[0], 0)
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "w", _readonly(w, np.complex128))
        if self.v0.ndim != 1 or self.w.shape[0] != self.v0.shape[0]:
            raise ValidationError("beam dimensions are inconsistent")
        if self.w.shape[1] > self.v0.shape[0]:
            raise ValidationError("more energy beams than antennas")
        if self.scheme_tag not in ("optimal", "sub1", "sub2", "trivial"):
            raise ValidationError(f"unknown scheme tag {self.scheme_tag!r}")

    @property
    def d(self) -> int:
        return int(self.w.shape[1])

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.v0) ** 2) + np.sum(np.abs(self.w) ** 2))


@dataclass(frozen=True)
class Metrics:
    sinr_ir: float
    sinr_er: np.ndarray
    secrecy_rate: float
    energy_per_er: np.ndarray
    weighted_sum_energy: float

    def __post_init__(self):
        object.__setattr__(self, "sinr_er", _readonly(self.sinr_er, np.float64))
        object.__setattr__(self, "energy_per_er", _readonly(self.energy_per_er, np.float64))


def generate_channels(params: SystemParams, spec: ChannelGenSpec, trial=None) -> ChannelSet:
    """Draw h then g_1 ... g_K, entries in index order, real part before
    imaginary part, from an RNG stream keyed by (seed) or (seed, trial).

    Each entry of h is CSCG with variance rho_h_sq; each entry of g_k is
    CSCG with variance rho_g_sq[k].  The fixed draw order makes a seed
    (plus optional trial index) fully determine the output.
    """
    if spec.rho_g_sq.shape != (params.k,):
        raise ValidationError(
            f"generator lists {spec.rho_g_sq.shape[0]} ER powers for K={params.k}"
        )
    entropy = [spec.seed] if trial is None else [spec.seed, int(trial)]
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    m, k = params.m, params.k

    def draw(n, var):
        raw = rng.standard_normal(2 * n)
        return np.sqrt(var / 2.0) * (raw[0::2] + 1j * raw[1::2])

    h = draw(m, spec.rho_h_sq)
    g = np.empty((k, m), dtype=np.complex128)
    for i in range(k):
        g[i] = draw(m, float(spec.rho_g_sq[i]))
    return ChannelSet(h=h, g=g)


def _beam_gains(ch: ChannelSet, beams: BeamformingSolution):
    """|v0^H h|^2, |v0^H g_k|^2 and the summed energy-beam gains."""
    v0 = beams.v0
    sig_ir = np.abs(np.vdot(v0, ch.h)) ** 2
    sig_er = np.abs(ch.g @ np.conj(v0)) ** 2  # |v0^H g_k|^2 = |g_k^T v0*|^2
    if beams.d:
        an_ir = float(np.sum(np.abs(beams.w.conj().T @ ch.h) ** 2))
        an_er = np.sum(np.abs(ch.g @ np.conj(beams.w)) ** 2, axis=1)
    else:
        an_ir = 0.0
        an_er = np.zeros(ch.k)
    return float(sig_ir), sig_er, an_ir, an_er


def compute_sinrs(ch: ChannelSet, beams: BeamformingSolution, params: SystemParams):
    """Return (sinr_ir, sinr_er[K]) for the given beams."""
    ch.validate_against(params)
    sig_ir, sig_er, an_ir, an_er = _beam_gains(ch, beams)
    sinr_ir = sig_ir / (an_ir + params.sigma0_sq)
    sinr_er = sig_er / (an_er + params.sigma_sq)
    return float(sinr_ir), sinr_er


def compute_secrecy_rate(ch: ChannelSet, beams: BeamformingSolution, params: SystemParams) -> float:
    """min_k log2(1+SINR_ir) - log2(1+SINR_er_k), unclamped (may be < 0)."""
    sinr_ir, sinr_er = compute_sinrs(ch, beams, params)
    rate_ir = np.log1p(sinr_ir) / _LN2
    rate_ev = np.log1p(np.max(sinr_er)) / _LN2
    return float(rate_ir - rate_ev)


def compute_energy(ch: ChannelSet, beams: BeamformingSolution, params: SystemParams):
    """Per-ER harvested energy and the mu-weighted sum [J per unit slot]."""
    ch.validate_against(params)
    _, sig_er, _, an_er = _beam_gains(ch, beams)
    energy = params.zeta * (sig_er + an_er)
    return energy, float(np.dot(params.mu, energy))


def compute_metrics(ch: ChannelSet, beams: BeamformingSolution, params: SystemParams) -> Metrics:
    sinr_ir, sinr_er = compute_sinrs(ch, beams, params)
    secrecy = compute_secrecy_rate(ch, beams, params)
    energy, weighted = compute_energy(ch, beams, params)
    return Metrics(
        sinr_ir=sinr_ir,
        sinr_er=sinr_er,
        secrecy_rate=secrecy,
        energy_per_er=energy,
        weighted_sum_energy=weighted,
    )


# --- channel file format -------------------------------------------------
#
# JSON object {"h": [[re, im], ...] length M,
#              "g": [[[re, im], ...], ...] K rows of length M}
# with numbers as IEEE-754 doubles in decimal text.


def _vec_to_pairs(v):
    return [[float(x.real), float(x.imag)] for x in v]


def _pairs_to_vec(pairs):
    return np.array([complex(p[0], p[1]) for p in pairs], dtype=np.complex128)


def channels_to_dict(ch: ChannelSet) -> dict:
    return {
        "h": _vec_to_pairs(ch.h),
        "g": [_vec_to_pairs(row) for row in ch.g],
    }


def channels_from_dict(data: dict) -> ChannelSet:
    try:
        h = _pairs_to_vec(data["h"])
        g = np.array([_pairs_to_vec(row) for row in data["g"]], dtype=np.complex128)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed channel payload: {exc}") from exc
    if g.ndim != 2:
        raise ValidationError("ER channel rows have inconsistent lengths")
    return ChannelSet(h=h, g=g)


def save_channels(ch: ChannelSet, path):
    Path(path).write_text(json.dumps(channels_to_dict(ch)) + "\n", encoding="utf-8")


def load_channels(path) -> ChannelSet:
    return channels_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
