"""Quick invariant suites used by the ``selftest`` and ``grad-check`` commands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import ComplexTensor, Tensor, grad_check
from ..channel import FadingConfig, derive_seed, make_rng, random_geometry, sample_channels
from ..cognn import CoGNN, ModelSpec
from ..secrecy import ChannelBatch, ResourceAllocation, Scenario, objective, objective_graph


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str


def random_pilots(rng, batch: int, users: int, snapshots: int) -> np.ndarray:
    return rng.standard_normal((batch, users, snapshots)) + 1j * rng.standard_normal((batch, users, snapshots))


def constraint_suite(passes: int = 1000, seed: int = 0, tol: float = 1e-6) -> SuiteResult:
    rng = make_rng(seed)
    worst = 0.0
    done = 0
    while done < passes:
        M, N, K = (int(x) for x in rng.integers(1, 6, size=3))
        spec = ModelSpec(M, N, K, 4 * M, d_mlp=16)
        model = CoGNN(spec, seed=int(rng.integers(1 << 62)))
        B = min(50, passes - done)
        w, a, phi = model.forward(random_pilots(rng, B, K, 4 * M) * rng.uniform(0.1, 10))
        worst = max(worst, np.abs(a.data.sum(1) - 1).max(), np.abs(np.linalg.norm(w.numpy(), axis=(1, 2)) - 1).max(),
                    np.abs(np.abs(phi.numpy()) - 1).max())
        done += B
    return SuiteResult("constraints", worst <= tol, f"{passes} passes, worst deviation {worst:.3g}")


def equivariance_suite(trials: int = 100, seed: int = 1, tol: float = 1e-9) -> SuiteResult:
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(trials):
        M, N = (int(x) for x in rng.integers(1, 5, size=2))
        K = int(rng.integers(2, 5))
        model = CoGNN(ModelSpec(M, N, K, 4 * M, d_mlp=16), seed=int(rng.integers(1 << 62)))
        y = random_pilots(rng, 1, K, 4 * M)
        perm = rng.permutation(K)
        w, a, phi = model.forward(y)
        wp, ap, phip = model.forward(y[:, perm])
        worst = max(worst, np.abs(wp.numpy() - w.numpy()[:, :, perm]).max(),
                    np.abs(ap.data - a.data[:, perm]).max(), np.abs(phip.numpy() - phi.numpy()).max())
    return SuiteResult("equivariance", worst <= tol, f"{trials} trials, worst deviation {worst:.3g}")


def tiny_loss_fn(seed: int = 0):
    """Loss of a d_mlp=8, M=N=K=2 network as a function of its parameter arrays."""
    rng = make_rng(seed)
    spec = ModelSpec(2, 2, 2, 8, d_mlp=8)
    base = CoGNN(spec, seed=seed)
    fading = FadingConfig(num_antennas=2, num_elements=2)
    reals = [sample_channels(fading, random_geometry(make_rng(derive_seed(seed, i, 0)), 2), derive_seed(seed, i, 1))
             for i in range(3)]
    batch = ChannelBatch.stack(reals)
    y = random_pilots(rng, 3, 2, 8) * 1e-5
    spec.feature_scale = 1e-5
    names = list(base.params)

    def fn(*tensors):
        model = CoGNN(spec, params=dict(zip(names, tensors)))
        w, a, phi = model.forward(y)
        return ad.mean(objective_graph(batch, w, a, phi, Scenario(), 1.0).penalized_loss)

    return fn, [base.params[n].data for n in names]


def end_to_end_floor(fn, point) -> float:
    """Smallest gradient magnitude judged by relative error.

    A central difference with h = 1e-5 on a loss of size |f| carries roughly
    1e-11 |f| of float64 rounding, so gradients much below 1e-7 |f| can only
    be compared in absolute terms.
    """
    return 1e-7 * max(1.0, abs(float(fn(*[Tensor(p) for p in point]).data)))


def op_checks(seed: int = 2) -> list[tuple[str, float]]:
    """Central-difference relative errors for every differentiable op, away from kinks."""
    rng = make_rng(seed)
    x = rng.uniform(0.5, 1.5, (3, 4)) * rng.choice([-1, 1], (3, 4))
    pos = rng.uniform(0.5, 2.0, (3, 4))
    m = rng.standard_normal((4, 2))
    cases = {
        "add": (lambda a, b: ad.tsum(a + b * b), [x, pos]),
        "sub": (lambda a, b: ad.tsum((a - b) * a), [x, pos]),
        "mul": (lambda a, b: ad.tsum(a * b), [x, pos]),
        "div": (lambda a, b: ad.tsum(a / b), [x, pos]),
        "neg": (lambda a: ad.tsum(-a * a), [x]),
        "square": (lambda a: ad.tsum(ad.square(a) * a), [x]),
        "sqrt": (lambda a: ad.tsum(ad.sqrt(a)), [pos]),
        "relu": (lambda a: ad.tsum(ad.relu(a) * a), [x]),
        "log2_1p": (lambda a: ad.tsum(ad.log2_1p(a)), [pos]),
        "matmul": (lambda a, b: ad.tsum(ad.square(a @ b)), [x, m]),
        "batched_matmul": (lambda a, b: ad.tsum(ad.square(ad.reshape(a, (3, 1, 4)) @ b)), [x, m]),
        "sum": (lambda a: ad.tsum(ad.square(ad.tsum(a, axis=0))), [x]),
        "mean": (lambda a: ad.tsum(ad.square(ad.mean(a, axis=1))), [x]),
        "max_pool": (lambda a: ad.tsum(ad.square(ad.max_pool(a, axis=0))), [x + np.arange(12).reshape(3, 4)]),
        "mean_pool": (lambda a: ad.tsum(ad.square(ad.mean_pool(a, axis=0))), [x]),
        "softmax": (lambda a: ad.tsum(ad.softmax(a, axis=1) * np.arange(4.0)), [x]),
        "l2_normalize": (lambda a: ad.tsum(ad.l2_normalize(a, axis=1) * np.arange(4.0)), [x]),
        "concat": (lambda a, b: ad.tsum(ad.square(ad.concat([a, b], axis=0)) * 0.5), [x, pos]),
        "reshape": (lambda a: ad.tsum(ad.reshape(a, (4, 3)) * np.arange(12.0).reshape(4, 3)), [x]),
        "swapaxes": (lambda a: ad.tsum(ad.swapaxes(a, 0, 1) * np.arange(12.0).reshape(4, 3)), [x]),
        "broadcast_to": (lambda a: ad.tsum(ad.square(ad.broadcast_to(ad.reshape(a, (1, 3, 4)), (2, 3, 4)))), [x]),
        "getitem": (lambda a: ad.tsum(ad.square(a[1:, ::2])), [x]),
        "take_along_axis": (lambda a: ad.tsum(ad.square(ad.take_along_axis(a, np.array([[1, 1], [0, 3], [2, 2]]),
                                                                             axis=1))), [x]),
        "complex_mul_abs2": (lambda a, b, c, d: ad.tsum((ComplexTensor(a, b) * ComplexTensor(c, d)).abs2()),
                             [x, pos, pos, x]),
        "complex_matmul": (lambda a, b, c, d: ad.tsum((ComplexTensor(a, b) @ ComplexTensor(c, d)).abs2()),
                           [x, pos, m, m[::-1].copy()]),
    }
    out = []
    for name, (fn, point) in cases.items():
        out.append((name, grad_check(fn, point).max_rel_error))
    return out


def gradient_suite(op_tol: float = 1e-6, model_tol: float = 1e-3) -> SuiteResult:
    ops = op_checks()
    worst_op = max(ops, key=lambda t: t[1])
    fn, point = tiny_loss_fn()
    model_err = grad_check(fn, point, floor=end_to_end_floor(fn, point)).max_rel_error
    ok = worst_op[1] < op_tol and model_err < model_tol
    return SuiteResult("gradients", ok, f"worst op {worst_op[0]} {worst_op[1]:.3g}; end-to-end {model_err:.3g}")


def oracle_suite(instances: int = 100, seed: int = 3, tol: float = 1e-10) -> SuiteResult:
    """Graph objective against the plain per-realization evaluator."""
    rng = make_rng(seed)
    worst = 0.0
    for i in range(instances):
        M, N, K = (int(x) for x in rng.integers(1, 5, size=3))
        fading = FadingConfig(num_antennas=M, num_elements=N)
        real = sample_channels(fading, random_geometry(make_rng(derive_seed(seed, i, 0)), K), derive_seed(seed, i, 1))
        w = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
        alloc = ResourceAllocation(w / np.linalg.norm(w), rng.dirichlet(np.ones(K)),
                                   np.exp(1j * rng.uniform(0, 2 * np.pi, N)), 1.0)
        scenario = Scenario() if K == 1 or rng.random() < 0.5 else Scenario.internal(int(rng.integers(K)))
        plain = objective(real, alloc, scenario).sum_secrecy
        graph = objective_graph(ChannelBatch.stack([real]), ComplexTensor.from_numpy(alloc.w[None]),
                                Tensor(alloc.a[None]), ComplexTensor.from_numpy(alloc.phi[None]), scenario, 1.0)
        worst = max(worst, abs(float(graph.sum_secrecy.data[0]) - plain))
    return SuiteResult("oracle", worst <= tol, f"{instances} instances, worst gap {worst:.3g}")


def run_all(quick: bool = False) -> list[SuiteResult]:
    return [
        constraint_suite(200 if quick else 1000),
        equivariance_suite(20 if quick else 100),
        gradient_suite(),
        oracle_suite(20 if quick else 100),
    ]
