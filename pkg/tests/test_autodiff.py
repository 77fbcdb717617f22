import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_realization
from irs_secrecy import autodiff as ad
from irs_secrecy.autodiff import AdamState, ComplexTensor, ShapeError, Tensor, adam_step, grad, grad_check
from irs_secrecy.harness.selftest import op_checks
from irs_secrecy.secrecy import ChannelBatch, Scenario, objective_graph


def test_pool_examples():
    x = Tensor(np.array([[1.0, 5.0], [3.0, 2.0]]))
    assert np.array_equal(ad.mean_pool(x, axis=0).data, [2.0, 3.5])
    assert np.array_equal(ad.max_pool(x, axis=0).data, [3.0, 5.0])


def test_softmax_symmetric():
    assert np.array_equal(ad.softmax(Tensor(np.zeros(2))).data, [0.5, 0.5])


def test_square_gradient():
    x = Tensor(np.array(3.0), requires_grad=True)
    assert grad(x * x, [x])[0] == pytest.approx(6.0)


@pytest.mark.parametrize("x0, slope", [(-1.0, 0.0), (2.0, 1.0)])
def test_relu_gradient(x0, slope):
    x = Tensor(np.array(x0), requires_grad=True)
    assert grad(ad.relu(x), [x])[0] == slope


def test_max_pool_routes_gradient_to_argmax():
    x = Tensor(np.array([[1.0, 5.0], [3.0, 2.0]]), requires_grad=True)
    g = grad(ad.tsum(ad.max_pool(x, axis=0)), [x])[0]
    assert np.array_equal(g, [[0.0, 1.0], [1.0, 0.0]])


def test_non_scalar_loss_rejected():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ValueError):
        ad.backward(x * 2.0)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        Tensor(np.ones((2, 3))) @ Tensor(np.ones((2, 3)))
    with pytest.raises(ShapeError):
        Tensor(np.ones(3)) + Tensor(np.ones(4))


def test_l2_normalize_zero_row_is_finite():
    x = Tensor(np.zeros((1, 2)), requires_grad=True)
    y = ad.l2_normalize(x, axis=-1)
    g = grad(ad.tsum(y), [x])[0]
    assert np.all(np.isfinite(y.data)) and np.all(np.isfinite(g))


def test_unreachable_param_gets_zero_gradient():
    x = Tensor(np.ones(2), requires_grad=True)
    y = Tensor(np.ones(2), requires_grad=True)
    gx, gy = grad(ad.tsum(x * x), [x, y])
    assert np.array_equal(gy, np.zeros(2)) and np.array_equal(gx, [2.0, 2.0])


def test_shared_subexpression_accumulates():
    x = Tensor(np.array(2.0), requires_grad=True)
    y = x * x
    assert grad(y * y + y, [x])[0] == pytest.approx(4 * 8 + 4)


def test_every_op_passes_grad_check():
    results = op_checks()
    assert len(results) >= 20
    for name, err in results:
        assert err < 1e-6, name


def test_grad_check_quadratic():
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    fn = lambda x: ad.tsum(x * (x @ Tensor(A)))
    assert grad_check(fn, [np.array([[0.3, -1.2]])]).max_rel_error < 1e-8


def test_grad_check_softmax_cross_of_sum():
    target = np.array([0.1, 0.7, 0.2])

    def fn(a, b):
        p = ad.softmax(a + b, axis=-1)
        return ad.tsum(p * p * target)

    assert grad_check(fn, [np.array([0.2, -0.4, 1.0]), np.array([0.5, 0.3, -0.1])]).max_rel_error < 1e-6


def test_grad_check_reports_non_finite():
    with pytest.raises(FloatingPointError), np.errstate(divide="ignore"):
        grad_check(lambda x: ad.tsum(x / 0.0), [np.ones(2)])


def test_secrecy_objective_phase_head_gradient():
    rng = np.random.default_rng(0)
    M, N, K = 3, 4, 2
    real = random_realization(4, M, N, K, noise=1.0)
    # unit-scale channels so the rates are far from saturation and the kinks
    real.h_direct = real.h_direct / np.abs(real.h_direct).max()
    real.g = real.g / np.abs(real.g).max()
    real.h_irs_user = real.h_irs_user / np.abs(real.h_irs_user).max()
    real.h_eve_direct *= 0.1 / np.abs(real.h_eve_direct).max()
    real.h_eve_irs *= 0.1 / np.abs(real.h_eve_irs).max()
    batch = ChannelBatch.stack([real])
    w = rng.standard_normal((1, M, K)) + 1j * rng.standard_normal((1, M, K))
    w = ComplexTensor.from_numpy(w / np.linalg.norm(w))
    a = Tensor(np.array([[0.6, 0.4]]))

    def fn(raw):
        pairs = ad.l2_normalize(ad.reshape(raw, (1, N, 2)), axis=-1)
        phi = ComplexTensor(pairs[..., 0], pairs[..., 1])
        return ad.mean(objective_graph(batch, w, a, phi, Scenario(), 1.0).penalized_loss)

    assert grad_check(fn, [rng.standard_normal((1, 2 * N))]).max_rel_error < 1e-4


def test_adam_first_step():
    p = Tensor(np.array([0.5, -2.0, 3.0]))
    before = p.data.copy()
    state = AdamState(learning_rate=1e-4)
    adam_step([p], [np.ones(3)], state)
    assert np.allclose(p.data - before, -1e-4, rtol=1e-6)
    assert state.step_count == 1


def test_adam_zero_gradient():
    p = Tensor(np.array([0.5, -2.0]))
    before = p.data.copy()
    state = AdamState()
    adam_step([p], [np.zeros(2)], state)
    assert np.array_equal(p.data, before)
    assert state.step_count == 1


def test_adam_deterministic():
    outs = []
    for _ in range(2):
        p = Tensor(np.array([1.0, 2.0]))
        state = AdamState(learning_rate=1e-2)
        for g in ([0.3, -0.1], [0.2, 0.4], [-1.0, 0.0]):
            adam_step([p], [np.array(g)], state)
        outs.append(p.data.copy())
    assert np.array_equal(outs[0], outs[1])


def test_adam_shape_check():
    with pytest.raises(ValueError):
        adam_step([Tensor(np.ones(2))], [np.ones(3)], AdamState())


finite = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 2), elements=finite), arrays(np.float64, (3, 2), elements=finite),
       st.floats(-3, 3), st.floats(-3, 3))
def test_gradient_linearity(x, c, alpha, beta):
    # d/dx (alpha f + beta g) = alpha f' + beta g'
    def f(t):
        return ad.tsum(ad.square(t) * c)

    def g(t):
        return ad.tsum(ad.softmax(t, axis=1) * c)

    t = Tensor(x, requires_grad=True)
    gf, = grad(f(t), [t])
    gg, = grad(g(t), [t])
    gs, = grad(f(t) * alpha + g(t) * beta, [t])
    assert np.allclose(gs, alpha * gf + beta * gg, atol=1e-9, rtol=1e-9)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 3), elements=finite))
def test_softmax_is_simplex(x):
    p = ad.softmax(Tensor(x), axis=1).data
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12) and np.all(p >= 0)
