import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import manual_realization, random_realization
from irs_secrecy import autodiff as ad
from irs_secrecy.baselines import (
    AOConfig, GAConfig, GnnVariant, PhaseObjective, RCGConfig, WMMSEConfig, alternating_optimize, ga_power,
    matched_filter_allocation, project_simplex, project_tangent, rcg_phase, retract, sum_rate, train_variant,
    wmmse_beamforming,
)
from irs_secrecy.channel import FadingConfig, dbm_to_watt, derive_seed
from irs_secrecy.cognn import CoGNN, ModelSpec, TrainConfig, evaluate, training_loss
from irs_secrecy.dataset import TEST, TRAIN, build_dataset
from irs_secrecy.secrecy import PowerFitness, Scenario, objective

QUICK_AO = AOConfig(outer_rounds=2, rcg=RCGConfig(max_iterations=30), ga=GAConfig(population=20, generations=20))


def random_phases(rng, n):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, n))


# degraded variants

def small_data(n=16, M=2, N=4, K=2):
    return build_dataset(FadingConfig(num_antennas=M, num_elements=N), n, 0, TRAIN, K, p_t=1.0)


def test_average_power_variant_is_exactly_equal():
    data = small_data()
    model = CoGNN(ModelSpec(2, 4, 2, 8, d_mlp=8, variant="average_power"), seed=0)
    _, a, _ = model.forward(data.pilots)
    assert np.array_equal(a.data, np.full((16, 2), 0.5))
    assert np.array_equal(GnnVariant("average_power").frozen_value(2, 2), [0.5, 0.5])


def test_random_irs_variant_ignores_parameters():
    data = small_data()
    outs = []
    for seed in (0, 1):
        model = CoGNN(ModelSpec(2, 4, 2, 8, d_mlp=8, variant="random_irs"), seed=seed)
        outs.append(model.forward(data.pilots, data.random_phi)[2].numpy())
    assert np.array_equal(outs[0], outs[1]) and np.array_equal(outs[0], data.random_phi)
    assert np.abs(np.abs(outs[0]) - 1).max() < 1e-12


def test_random_irs_needs_phases():
    model = CoGNN(ModelSpec(2, 4, 2, 8, d_mlp=8, variant="random_irs"), seed=0)
    with pytest.raises(ValueError):
        model.forward(small_data().pilots)


def test_omni_beam_head_gets_no_gradient():
    data = small_data()
    model = CoGNN(ModelSpec(2, 4, 2, 8, d_mlp=8, feature_scale=1e-6, variant="omni_beam"), seed=0)
    loss, _ = training_loss(model, data, Scenario(), 1.0)
    names = ["head.beam.W", "head.beam.b", "head.power.W"]
    grads = ad.grad(loss, [model.params[n] for n in names])
    assert not np.any(grads[0]) and not np.any(grads[1])
    assert np.any(grads[2])
    assert "head.beam.W" not in model.trainable()


def test_unknown_variant():
    with pytest.raises(ValueError):
        GnnVariant("no_irs")


def test_train_variant_keeps_frozen_head():
    data = small_data(32)
    cfg = TrainConfig(learning_rate=1e-2, batch_size=8, max_epochs=2, iterations_per_epoch=3, d_mlp=8)
    ckpt, _ = train_variant("average_power", data, Scenario(), cfg, 1.0)
    allocs = ckpt.model().infer(data.pilots, 1.0)
    assert all(np.array_equal(x.a, [0.5, 0.5]) for x in allocs)


# WMMSE

@pytest.mark.parametrize("seed", range(10))
def test_wmmse_single_user_matched_filter(seed):
    rng = np.random.default_rng(seed)
    real = random_realization(seed, M=4, N=8, K=1)
    phi = random_phases(rng, 8)
    res = wmmse_beamforming(real, np.ones(1), phi, 1.0)
    h = real.combined_user_channels(phi)[0]
    assert abs(np.vdot(np.conj(h) / np.linalg.norm(h), res.w[:, 0])) > 0.999


@pytest.mark.parametrize("seed", range(10))
def test_wmmse_monotone_and_unit_norm(seed):
    rng = np.random.default_rng(seed)
    K = 2 + seed % 2
    real = random_realization(seed, M=4, N=8, K=K)
    a, phi = rng.dirichlet(np.ones(K)), random_phases(rng, 8)
    res = wmmse_beamforming(real, a, phi, 1.0)
    assert np.diff(res.trace).min() >= -1e-9
    assert abs(np.linalg.norm(res.w) - 1) < 1e-12
    assert sum_rate(real, res.w, a, phi, 1.0) == pytest.approx(res.trace[-1], rel=1e-9)


def test_wmmse_zero_channel():
    real = manual_realization(np.zeros((3, 2)), np.zeros((2, 3)), np.zeros((2, 2)))
    res = wmmse_beamforming(real, np.array([0.5, 0.5]), np.ones(2, complex), 1.0)
    expected = np.zeros((3, 2), complex)
    expected[0, 0] = 1.0
    assert np.array_equal(res.w, expected)
    assert res.flag == "zero-channel"


def test_wmmse_flags_non_convergence():
    real = random_realization(1, M=4, N=8, K=3)
    rng = np.random.default_rng(1)
    res = wmmse_beamforming(real, rng.dirichlet(np.ones(3)), random_phases(rng, 8), 1.0,
                            WMMSEConfig(inner_iterations=1, tolerance=0.0))
    assert not res.converged and res.flag == "max-iterations"
    assert abs(np.linalg.norm(res.w) - 1) < 1e-12


# RCG

def scalar_toy(seed):
    rng = np.random.default_rng(seed)
    c = lambda: complex(rng.standard_normal(), rng.standard_normal())
    return manual_realization([[c()]], [[c()]], [[c()]], [0.3 * c()], [0.3 * c()], noise=1.0)


@pytest.mark.parametrize("seed", [0, 1, 2, 4])
def test_rcg_scalar_toy_matches_grid(seed):
    real = scalar_toy(seed)
    w, a = np.ones((1, 1), complex), np.ones(1)
    fn = PhaseObjective(real, w, a, 1.0, Scenario())
    grid = np.exp(2j * np.pi * np.arange(10_000) / 10_000)
    values = np.array([-fn.value(np.array([g])) for g in grid])
    assert values.max() > 0.1  # a secrecy-positive landscape with a unique peak
    res = rcg_phase(real, w, a, np.ones(1, complex), 1.0, Scenario())
    assert abs(np.angle(res.phi[0] / grid[int(np.argmax(values))])) < 0.01


@pytest.mark.parametrize("seed", range(6))
def test_rcg_unit_modulus_and_monotone(seed):
    rng = np.random.default_rng(seed)
    real = random_realization(seed, M=3, N=8, K=2)
    w = wmmse_beamforming(real, np.array([0.5, 0.5]), np.ones(8, complex), 1.0).w
    res = rcg_phase(real, w, np.array([0.6, 0.4]), random_phases(rng, 8), 1.0, Scenario(), RCGConfig(max_iterations=50))
    for phi in res.iterates:
        assert np.abs(np.abs(phi) - 1).max() < 1e-12
    assert np.diff(res.trace).min() >= -1e-10
    assert objective(real, matched_filter_allocation(real, res.phi, 1.0), Scenario()).report.modulus is False


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 16))
def test_tangent_projection_orthogonal(seed, n):
    rng = np.random.default_rng(seed)
    phi = random_phases(rng, n)
    g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    t = project_tangent(phi, g)
    # orthogonal to the radial direction in the real 2-plane of every element
    assert np.abs(np.real(t * np.conj(phi))).max() < 1e-10 * max(1.0, np.abs(g).max())
    assert np.allclose(np.abs(retract(phi + 0.3 * t)), 1.0, atol=1e-12)


def test_phase_gradient_matches_difference():
    rng = np.random.default_rng(3)
    real = random_realization(3, M=2, N=3, K=2, noise=1e-13)
    w = wmmse_beamforming(real, np.array([0.5, 0.5]), np.ones(3, complex), 1.0).w
    fn = PhaseObjective(real, w, np.array([0.7, 0.3]), 1.0, Scenario())
    phi = random_phases(rng, 3)
    _, g = fn.value_and_grad(phi)
    h = 1e-6
    for n in range(3):
        for unit, part in ((1.0, g[n].real), (1j, g[n].imag)):
            d = np.zeros(3, complex)
            d[n] = unit * h
            num = (fn.value(phi + d) - fn.value(phi - d)) / (2 * h)
            assert num == pytest.approx(part, rel=1e-5, abs=1e-7)


# GA

@pytest.mark.parametrize("seed", range(8))
def test_ga_matches_grid_on_two_users(seed):
    rng = np.random.default_rng(seed)
    real = random_realization(seed, M=3, N=4, K=2)
    phi = np.exp(1j * rng.uniform(0, 6.28, 4))
    w = wmmse_beamforming(real, np.array([0.5, 0.5]), phi, 1.0).w
    a1 = np.linspace(0, 1, 1001)
    values = PowerFitness(real, w, phi, 1.0, Scenario())(np.stack([a1, 1 - a1], axis=1))
    best = int(np.argmax(values))
    steps = np.diff(values)
    assert np.all(steps[:best] >= -1e-12) and np.all(steps[best:] <= 1e-12)  # unimodal instance
    res = ga_power(real, w, phi, 1.0, Scenario(), rng_seed=seed)
    assert abs(res.a[0] - a1[best]) < 0.02


def test_ga_deterministic_and_monotone():
    real = random_realization(2, M=3, N=4, K=3)
    phi = np.ones(4, complex)
    w = wmmse_beamforming(real, np.full(3, 1 / 3), phi, 1.0).w
    r1 = ga_power(real, w, phi, 1.0, Scenario(), rng_seed=11)
    r2 = ga_power(real, w, phi, 1.0, Scenario(), rng_seed=11)
    assert np.array_equal(r1.a, r2.a) and r1.trace == r2.trace
    assert np.diff(r1.trace).min() >= 0
    assert abs(r1.a.sum() - 1) < 1e-12 and r1.a.min() >= 0


def test_ga_keeps_incumbent():
    real = random_realization(5, M=3, N=4, K=2)
    phi = np.ones(4, complex)
    w = wmmse_beamforming(real, np.array([0.5, 0.5]), phi, 1.0).w
    fit = PowerFitness(real, w, phi, 1.0, Scenario())
    inc = np.array([0.37, 0.63])
    res = ga_power(real, w, phi, 1.0, Scenario(), GAConfig(population=4, generations=1), rng_seed=0, incumbent=inc)
    assert res.fitness >= fit(inc)[0] - 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6))
def test_simplex_projection(x):
    p = project_simplex(np.array(x))
    assert abs(p.sum() - 1) < 1e-12 and p.min() >= 0
    assert np.allclose(project_simplex(p), p, atol=1e-12)


# alternating optimization

@pytest.mark.parametrize("seed, scenario", [(0, Scenario()), (1, Scenario.internal(1)), (2, Scenario())])
def test_ao_monotone_and_feasible(seed, scenario, tmp_path):
    real = random_realization(seed, M=3, N=8, K=2)
    res = alternating_optimize(real, scenario, 1.0, QUICK_AO, rng_seed=seed)
    assert np.diff(res.trace).min() >= -1e-9
    rep = objective(real, res.allocation, scenario).report
    assert not (rep.simplex or rep.norm or rep.modulus)
    assert objective(real, res.allocation, scenario).sum_secrecy == pytest.approx(res.trace[-1], rel=1e-9)
    path = tmp_path / "trace.csv"
    res.write_trace(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["round", "stage", "sum_secrecy"] and len(rows) > 1


def test_ao_beats_random_irs_variant():
    p_t = dbm_to_watt(30)
    fading = FadingConfig(num_antennas=4, num_elements=16)
    tr = build_dataset(fading, 2000, 0, TRAIN, 2, "fixed", p_t=p_t)
    te = build_dataset(fading, 8, 0, TEST, 2, "fixed", p_t=p_t)
    cfg = TrainConfig(learning_rate=1e-3, max_epochs=5, iterations_per_epoch=50, d_mlp=128)
    ckpt, _ = train_variant("random_irs", tr, Scenario(), cfg, p_t)
    variant = evaluate(ckpt.model(), te, Scenario(), p_t).mean()
    ao = np.mean([objective(r, alternating_optimize(r, Scenario(), p_t, QUICK_AO, i).allocation, Scenario()).sum_secrecy
                  for i, r in enumerate(te.realizations)])
    assert ao > variant


def test_ao_accepts_full_width_seed():
    real = random_realization(4, M=2, N=4, K=2)
    seed = derive_seed(7, 3, 200)
    assert seed >= 2 ** 64
    r1 = alternating_optimize(real, Scenario(), 1.0, QUICK_AO, seed)
    r2 = alternating_optimize(real, Scenario(), 1.0, QUICK_AO, seed)
    assert r1.trace == r2.trace
