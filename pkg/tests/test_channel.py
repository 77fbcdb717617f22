import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import manual_realization
from irs_secrecy.channel import (
    FadingConfig, Geometry, GeometryError, PilotConfig, angles_from_geometry, dbm_to_watt, default_pilots,
    derive_seed, fixed_geometry, load_realization, path_loss_db, path_loss_linear, sample_channels,
    save_realization, steering_bs, steering_irs, superpose, synthesize_pilots,
)

import oracle


# path loss

def test_path_loss_values():
    assert path_loss_db(1.0, "direct") == pytest.approx(32.6)
    assert path_loss_db(10.0, "direct") == pytest.approx(69.3)
    assert path_loss_db(10.0, "irs_hop") == pytest.approx(52.0)


def test_path_loss_is_amplitude():
    assert path_loss_linear(10.0, "irs_hop") == pytest.approx(10 ** (-52.0 / 20))


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_path_loss_rejects_nonpositive_distance(d):
    with pytest.raises(GeometryError):
        path_loss_db(d)


@given(st.floats(0.1, 1e4), st.floats(1.001, 10.0), st.sampled_from(["direct", "irs_hop"]))
def test_path_loss_strictly_decreasing(d, factor, model):
    assert path_loss_linear(d * factor, model) < path_loss_linear(d, model)


def test_noise_dbm_to_watt():
    assert dbm_to_watt(-100.0) == pytest.approx(1e-13)
    assert dbm_to_watt(30.0) == pytest.approx(1.0)


# angles

def test_angles_reference_positions():
    geo = Geometry((0, 0, 0), (20, 30, 0), [(40, 40, -10)], (75, 40, -20))
    ang = angles_from_geometry(geo)
    assert ang.user_sin_az_cos_el[0] == pytest.approx(10 / math.sqrt(600))
    assert ang.user_sin_az_cos_el[0] == pytest.approx(0.4082, abs=1e-4)
    assert ang.user_sin_el[0] == pytest.approx(-10 / math.sqrt(600))
    assert ang.bs_cos_az_cos_el == pytest.approx(20 / math.sqrt(1300))


def test_angles_zero_offsets():
    geo = Geometry((0, 0, 0), (20, 30, 0), [(40, 30, 0)])
    ang = angles_from_geometry(geo)
    assert ang.user_sin_az_cos_el[0] == 0.0
    assert ang.user_sin_el[0] == 0.0


def test_angles_coincident_positions():
    with pytest.raises(GeometryError):
        angles_from_geometry(Geometry((0, 0, 0), (20, 30, 0), [(20, 30, 0)]))
    with pytest.raises(GeometryError):
        angles_from_geometry(Geometry((0, 0, 0), (0, 0, 0), [(40, 40, -10)]))


# steering vectors

def test_steering_irs_examples():
    assert steering_irs(0.3, -0.7, 1)[0] == 1 + 0j
    assert steering_irs(0.5, 0.0, 2)[1] == pytest.approx(1j, abs=1e-15)
    assert steering_irs(0.0, 1.0, 11)[10] == pytest.approx(-1 + 0j, abs=1e-15)


def test_steering_bs_examples():
    assert steering_bs(0.77, 1)[0] == 1 + 0j
    assert np.array_equal(steering_bs(0.0, 5), np.ones(5, complex))
    assert np.allclose(steering_bs(1.0, 2), [1, np.exp(1j)], atol=1e-15)


@given(st.floats(-1, 1), st.floats(-1, 1), st.integers(1, 120))
def test_steering_unit_modulus(u, v, n):
    assert np.abs(np.abs(steering_irs(u, v, n)) - 1).max() < 1e-12
    assert np.abs(np.abs(steering_bs(u, n)) - 1).max() < 1e-12


# fading

def test_infinite_k_factor_is_pure_los():
    geo = fixed_geometry()
    real = sample_channels(FadingConfig(num_antennas=4, num_elements=16, rician_k=math.inf), geo, 7)
    ang = angles_from_geometry(geo)
    beta1 = path_loss_linear(np.linalg.norm(geo.irs_position - geo.bs_position), "irs_hop")
    los = np.outer(steering_bs(ang.bs_cos_az_cos_el, 4), np.conj(steering_irs(ang.irs_sin_az_cos_el, ang.irs_sin_el, 16)))
    assert np.array_equal(real.g, beta1 * los)
    s = np.linalg.svd(real.g, compute_uv=False)
    assert s[1] < 1e-10 * s[0]


def test_zero_k_factor_unit_variance():
    geo = fixed_geometry()
    cfg = FadingConfig(num_antennas=2, num_elements=2, rician_k=0.0)
    beta1 = path_loss_linear(np.linalg.norm(geo.irs_position - geo.bs_position), "irs_hop")
    n = 10_000
    samples = np.stack([sample_channels(cfg, geo, derive_seed(5, i, 1)).g / beta1 for i in range(n)])
    power = np.abs(samples) ** 2
    # |x|^2 of a unit complex Gaussian is Exp(1): standard error 1/sqrt(n)
    assert np.all(np.abs(power.mean(axis=0) - 1) < 3 / math.sqrt(n))
    assert np.abs(samples.mean(axis=0)).max() < 3 / math.sqrt(n)


def test_sampling_deterministic():
    cfg = FadingConfig()
    a = sample_channels(cfg, fixed_geometry(), 99)
    b = sample_channels(cfg, fixed_geometry(), 99)
    c = sample_channels(cfg, fixed_geometry(), 100)
    for f in ("g", "h_direct", "h_irs_user", "h_eve_direct", "h_eve_irs"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    assert not np.array_equal(a.g, c.g)


def test_derive_seed_distinct():
    keys = {derive_seed(r, i, s) for r in range(3) for i in range(3) for s in range(3)}
    assert len(keys) == 27


# pilots

def test_pilots_zero_channels():
    real = manual_realization(np.zeros((2, 3)), np.zeros((2, 2)), np.zeros((2, 3)))
    y = synthesize_pilots(real, PilotConfig(8, noise_on=False), 0)
    assert np.array_equal(y, np.zeros((2, 8), complex))


def test_pilots_scalar_hand_case():
    real = manual_realization([[1.0]], [[1.0]], [[1.0]])
    y = synthesize_pilots(real, PilotConfig(1, 1.0, noise_on=False), 0)
    assert y.shape == (1, 1)
    assert y[0, 0] == 2 + 0j


def test_pilot_noise_variance():
    noise = 0.25
    real = manual_realization(np.zeros((1, 1)), [[0.0]], [[0.0]], noise=noise)
    n = 10_000
    y = np.array([synthesize_pilots(real, PilotConfig(1), seed)[0, 0] for seed in range(n)])
    # standard error of mean |y|^2 for CN(0, s2) is s2/sqrt(n)
    assert abs(np.mean(np.abs(y) ** 2) - noise) < 3 * noise / math.sqrt(n)


def test_pilots_match_oracle(rng):
    real = sample_channels(FadingConfig(num_antennas=3, num_elements=5), fixed_geometry(), 3)
    pilots = PilotConfig(12, 2.0, noise_on=False)
    y = synthesize_pilots(real, pilots, 0)
    h_d, g, h_r, _, _ = oracle.realization_args(real)
    for k in range(2):
        for s in range(12):
            ref = oracle.pilot(h_d[k], g, h_r[k], pilots.irs_pattern(s, 5).tolist(), pilots.beam(s, 3).tolist(), 2.0)
            assert abs(y[k, s] - ref) < 1e-12 * max(1.0, abs(ref))


def test_pilot_linearity():
    cfg = FadingConfig(num_antennas=3, num_elements=6)
    c1 = sample_channels(cfg, fixed_geometry(), 1)
    other = sample_channels(cfg, fixed_geometry(), 2)
    c2 = replace(other, g=c1.g)
    pilots = default_pilots(3, noise_on=False)
    pilots.include_eve = True
    y1, e1 = synthesize_pilots(c1, pilots, 0)
    y2, e2 = synthesize_pilots(c2, pilots, 0)
    y12, e12 = synthesize_pilots(superpose(c1, c2), pilots, 0)
    scale = np.abs(y12).max()
    assert np.abs(y12 - (y1 + y2)).max() <= 1e-12 * max(scale, 1e-300) + 1e-300
    assert np.abs(e12 - (e1 + e2)).max() <= 1e-12 * np.abs(e12).max()


def test_superpose_requires_common_g():
    cfg = FadingConfig(num_antennas=2, num_elements=2)
    with pytest.raises(ValueError):
        superpose(sample_channels(cfg, fixed_geometry(), 1), sample_channels(cfg, fixed_geometry(), 2))


def test_binary_dump_round_trip(tmp_path):
    real = sample_channels(FadingConfig(num_antennas=3, num_elements=12), fixed_geometry(), derive_seed(9, 4, 1))
    y = synthesize_pilots(real, default_pilots(3), 1)
    path = tmp_path / "real.bin"
    save_realization(path, real, y)
    back, y_back = load_realization(path)
    for f in ("g", "h_direct", "h_irs_user", "h_eve_direct", "h_eve_irs"):
        assert np.array_equal(getattr(back, f), getattr(real, f))
    assert np.array_equal(y_back, y)
    assert back.seed == real.seed and back.noise_power == real.noise_power
    assert np.array_equal(back.geometry.user_positions, real.geometry.user_positions)
    raw = path.read_bytes()
    assert raw[:8] == b"IRSCHAN\x00"
