import json

import numpy as np
import pytest

from conftest import draw_channels, make_gen_spec, make_params, orthogonal_channels
from swiptbf.errors import ValidationError
from swiptbf.model import (
    BeamformingSolution,
    ChannelGenSpec,
    ChannelSet,
    SystemParams,
    compute_energy,
    compute_metrics,
    compute_secrecy_rate,
    compute_sinrs,
    generate_channels,
    load_channels,
    save_channels,
)


def no_beams(m):
    return BeamformingSolution(v0=np.zeros(m, dtype=complex), w=np.zeros((m, 0)))


class TestValidation:
    def test_single_antenna_rejected(self):
        with pytest.raises(ValidationError):
            make_params(m=1, k=1)

    def test_zeta_bounds(self):
        with pytest.raises(ValidationError):
            make_params(zeta=1.0)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValidationError):
            make_params(mu=[1.0, -1.0, 1.0])

    def test_zero_channel_power_rejected(self):
        with pytest.raises(ValidationError):
            ChannelGenSpec(rho_h_sq=0.0, rho_g_sq=np.array([1e-3]), seed=0)

    def test_er_weaker_than_ir_rejected(self):
        with pytest.raises(ValidationError):
            ChannelGenSpec(rho_h_sq=1e-3, rho_g_sq=np.array([1e-4]), seed=0)


class TestGeneration:
    def test_deterministic(self):
        params = make_params()
        spec = make_gen_spec(seed=42)
        a = generate_channels(params, spec)
        b = generate_channels(params, spec)
        assert np.array_equal(a.h, b.h)
        assert np.array_equal(a.g, b.g)

    def test_trial_streams_differ(self):
        params = make_params()
        spec = make_gen_spec(seed=42)
        a = generate_channels(params, spec, trial=0)
        b = generate_channels(params, spec, trial=1)
        assert not np.allclose(a.h, b.h)

    def test_dimension_mismatch(self):
        params = make_params(k=3)
        with pytest.raises(ValidationError):
            generate_channels(params, make_gen_spec(k=2, seed=0))

    def test_sample_mean_power(self):
        # law of large numbers: mean ||h||^2 / M within 5% of rho_h_sq
        params = make_params()
        total = 0.0
        n = 10_000
        for t in range(n):
            ch = generate_channels(params, make_gen_spec(seed=9), trial=t)
            total += float(np.sum(np.abs(ch.h) ** 2)) / params.m
        mean = total / n
        assert abs(mean - 1e-7) <= 0.05 * 1e-7


class TestMetrics:
    def test_zero_information_beam(self):
        params = make_params(m=2, k=1)
        ch = orthogonal_channels()
        beams = BeamformingSolution(
            v0=np.zeros(2, dtype=complex),
            w=np.array([[0.0], [1.0]], dtype=complex),
        )
        sinr_ir, sinr_er = compute_sinrs(ch, beams, params)
        assert sinr_ir == 0.0
        assert np.all(sinr_er == 0.0)

    def test_orthogonal_unit_case(self):
        # v0 is orthogonal to g1, so the ER sees none of the information
        # beam and its SINR is exactly zero
        params = make_params(m=2, k=1, sigma0_sq=1.0, sigma_sq=[1.0])
        ch = orthogonal_channels()
        beams = BeamformingSolution(
            v0=np.array([1.0, 0.0], dtype=complex),
            w=np.array([[0.0], [1.0]], dtype=complex),
        )
        sinr_ir, sinr_er = compute_sinrs(ch, beams, params)
        assert sinr_ir == pytest.approx(1.0)
        assert sinr_er[0] == pytest.approx(0.0)

    def test_secrecy_rate_one_bit(self):
        params = make_params(m=2, k=1, sigma0_sq=1.0, sigma_sq=[1.0])
        ch = orthogonal_channels()
        beams = BeamformingSolution(v0=np.array([1.0, 0.0], dtype=complex), w=np.zeros((2, 0)))
        assert compute_secrecy_rate(ch, beams, params) == pytest.approx(1.0)

    def test_secrecy_rate_negative_unclamped(self):
        params = make_params(m=2, k=1, sigma0_sq=1.0, sigma_sq=[1.0])
        ch = orthogonal_channels()
        beams = BeamformingSolution(v0=np.array([0.0, 1.0], dtype=complex), w=np.zeros((2, 0)))
        assert compute_secrecy_rate(ch, beams, params) == pytest.approx(-1.0)

    def test_min_over_eavesdroppers(self):
        params = make_params(m=4, k=2, sigma0_sq=1.0, sigma_sq=[1.0, 1.0])
        ch = draw_channels(make_params(m=4, k=2), seed=5)
        v0 = np.sqrt(0.7) * ch.h / np.linalg.norm(ch.h)
        w = np.sqrt(0.3) * (ch.g[0] / np.linalg.norm(ch.g[0]))[:, None]
        beams = BeamformingSolution(v0=v0, w=w)
        r = compute_secrecy_rate(ch, beams, params)
        sinr_ir, sinr_er = compute_sinrs(ch, beams, params)
        per_k = [np.log2(1 + sinr_ir) - np.log2(1 + s) for s in sinr_er]
        assert r == pytest.approx(min(per_k), rel=1e-12)

    def test_sinrs_match_scalar_recomputation(self, rng):
        params = make_params(m=4, k=3, sigma0_sq=0.31, sigma_sq=[0.2, 0.4, 0.8])
        ch = draw_channels(params, seed=17)
        v0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        beams = BeamformingSolution(v0=v0, w=w)
        sinr_ir, sinr_er = compute_sinrs(ch, beams, params)

        def inner(a, b):
            return sum(complex(a[i]).conjugate() * complex(b[i]) for i in range(len(a)))

        num = abs(inner(v0, ch.h)) ** 2
        den = sum(abs(inner(w[:, i], ch.h)) ** 2 for i in range(2)) + params.sigma0_sq
        assert sinr_ir == pytest.approx(num / den, rel=1e-12)
        for k in range(3):
            num = abs(inner(v0, ch.g[k])) ** 2
            den = sum(abs(inner(w[:, i], ch.g[k])) ** 2 for i in range(2)) + params.sigma_sq[k]
            assert sinr_er[k] == pytest.approx(num / den, rel=1e-12)

    def test_energy_zero_beams(self):
        params = make_params()
        ch = draw_channels(params, seed=2)
        energy, weighted = compute_energy(ch, no_beams(4), params)
        assert np.all(energy == 0.0)
        assert weighted == 0.0

    def test_energy_direct_value(self):
        params = make_params(m=2, k=1, zeta=0.5)
        ch = ChannelSet(h=np.array([0.0, 1.0]) * 1e-3, g=np.array([[1.0, 0.0]], dtype=complex))
        beams = BeamformingSolution(v0=np.array([np.sqrt(2.0), 0.0], dtype=complex), w=np.zeros((2, 0)))
        energy, weighted = compute_energy(ch, beams, params)
        assert energy[0] == pytest.approx(1.0)
        assert weighted == pytest.approx(1.0)

    def test_phase_rotation_invariance(self, rng):
        params = make_params()
        ch = draw_channels(params, seed=3)
        v0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        base = compute_metrics(ch, BeamformingSolution(v0=v0, w=w), params)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=3))
        rotated = BeamformingSolution(v0=phases[0] * v0, w=w * phases[1:][None, :])
        rot = compute_metrics(ch, rotated, params)
        assert rot.sinr_ir == pytest.approx(base.sinr_ir, rel=1e-12)
        assert rot.weighted_sum_energy == pytest.approx(base.weighted_sum_energy, rel=1e-12)
        np.testing.assert_allclose(rot.energy_per_er, base.energy_per_er, rtol=1e-12)

    def test_energy_monotone_in_added_beam(self, rng):
        params = make_params()
        ch = draw_channels(params, seed=4)
        v0 = 0.5 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
        base, _ = compute_energy(ch, BeamformingSolution(v0=v0, w=np.zeros((4, 0))), params)
        extra = 0.3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
        more, _ = compute_energy(ch, BeamformingSolution(v0=v0, w=extra[:, None]), params)
        assert np.all(more >= base - 1e-15)

    def test_uniform_weights_give_plain_sum(self, rng):
        params = make_params(mu=[1.0, 1.0, 1.0])
        ch = draw_channels(params, seed=6)
        v0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        energy, weighted = compute_energy(ch, BeamformingSolution(v0=v0, w=np.zeros((4, 0))), params)
        assert weighted == pytest.approx(float(np.sum(energy)), rel=1e-14)

    def test_zero_v0_secrecy_nonpositive(self, rng):
        params = make_params()
        ch = draw_channels(params, seed=8)
        assert compute_secrecy_rate(ch, no_beams(4), params) == 0.0
        w = rng.standard_normal((4, 1)) + 1j * rng.standard_normal((4, 1))
        beams = BeamformingSolution(v0=np.zeros(4, dtype=complex), w=w)
        assert compute_secrecy_rate(ch, beams, params) <= 0.0


class TestChannelFile:
    def test_round_trip(self, tmp_path):
        params = make_params()
        ch = draw_channels(params, seed=1)
        path = tmp_path / "channels.json"
        save_channels(ch, path)
        loaded = load_channels(path)
        assert np.array_equal(loaded.h, ch.h)
        assert np.array_equal(loaded.g, ch.g)

    def test_schema(self, tmp_path):
        params = make_params(m=2, k=1)
        ch = orthogonal_channels()
        path = tmp_path / "ch.json"
        save_channels(ch, path)
        data = json.loads(path.read_text())
        assert len(data["h"]) == 2
        assert len(data["g"]) == 1
        assert data["h"][0] == [1.0, 0.0]

    def test_malformed_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"h": [[0, 0]]}))
        with pytest.raises(ValidationError):
            load_channels(path)
