"""Message-passing network mapping received pilots to (w, a, phi).

Node 0 is the IRS, nodes 1..K are users.  Every per-user map shares its
weights across users, user aggregation is a mean over the other users and
the IRS aggregation is a max over all users, so permuting users permutes
the beam columns and power entries and leaves the phases unchanged.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import ComplexTensor, Tensor
from ..channel import make_rng
from ..secrecy import ResourceAllocation

VARIANTS = (None, "average_power", "random_irs", "omni_beam")


@dataclass
class ModelSpec:
    num_antennas: int
    num_elements: int
    num_users: int
    snapshot_count: int
    d_mlp: int = 512
    layers: int = 2
    feature_scale: float = 1.0
    variant: str | None = None

    def __post_init__(self):
        if self.d_mlp < 1 or self.layers < 1:
            raise ValueError("d_mlp and layers must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def input_length(self) -> int:
        return 2 * self.snapshot_count

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GraphState:
    r_user: Tensor  # B x K x d
    r_irs: Tensor   # B x d


def _layer_shapes(spec: ModelSpec) -> list[tuple[str, int, int]]:
    d = spec.d_mlp
    shapes = [("in1", spec.input_length, d), ("in2", d, d)]
    for i in range(spec.layers):
        shapes += [
            (f"mp{i}.user_msg", d, d),       # f_nn applied to neighbours before mean pooling
            (f"mp{i}.user_combine", 2 * d, d),
            (f"mp{i}.irs_self", d, d),       # transformed IRS vector fed to both updates
            (f"mp{i}.user_update", 2 * d, d),
            (f"mp{i}.irs_msg", d, d),        # per-user transform before max pooling
            (f"mp{i}.irs_update", 2 * d, d),
        ]
    shapes += [("head.phase", d, 2 * spec.num_elements), ("head.beam", d, 2 * spec.num_antennas),
               ("head.power", d, 1)]
    return shapes


def init_params(spec: ModelSpec, seed: int) -> dict[str, Tensor]:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases."""
    rng = make_rng(seed)
    params = {}
    for name, fan_in, fan_out in _layer_shapes(spec):
        bound = 1.0 / np.sqrt(fan_in)
        params[name + ".W"] = Tensor(rng.uniform(-bound, bound, (fan_in, fan_out)), requires_grad=True)
        params[name + ".b"] = Tensor(rng.uniform(-bound, bound, fan_out), requires_grad=True)
    return params


class CoGNN:
    def __init__(self, spec: ModelSpec, params: dict[str, Tensor] | None = None, seed: int = 0):
        self.spec = spec
        self.params = params if params is not None else init_params(spec, seed)

    # -- building blocks -----------------------------------------------------

    def _linear(self, x: Tensor, name: str) -> Tensor:
        return x @ self.params[name + ".W"] + self.params[name + ".b"]

    def _dense(self, x: Tensor, name: str) -> Tensor:
        return ad.relu(self._linear(x, name))

    def features(self, y: np.ndarray) -> Tensor:
        y = np.asarray(y)
        if y.ndim != 3 or y.shape[2] != self.spec.snapshot_count:
            raise ad.ShapeError(f"pilots must be (B, K, {self.spec.snapshot_count}), got {y.shape}")
        return Tensor(np.concatenate([y.real, y.imag], axis=-1) / self.spec.feature_scale)

    def input_layer(self, x: Tensor) -> GraphState:
        r_user = self._dense(self._dense(x, "in1"), "in2")
        r_irs = self._dense(self._dense(ad.mean(x, axis=1), "in1"), "in2")
        return GraphState(r_user, r_irs)

    def message_passing_layer(self, state: GraphState, i: int) -> GraphState:
        B, K, d = state.r_user.shape
        msg = self._dense(state.r_user, f"mp{i}.user_msg")
        if K > 1:
            agg = (ad.tsum(msg, axis=1, keepdims=True) - msg) * (1.0 / (K - 1))
        else:
            agg = msg * 0.0
        combined = self._dense(ad.concat([state.r_user, agg], axis=-1), f"mp{i}.user_combine")
        irs_t = self._dense(state.r_irs, f"mp{i}.irs_self")
        irs_b = ad.broadcast_to(ad.reshape(irs_t, (B, 1, d)), (B, K, d))
        r_user = self._dense(ad.concat([irs_b, combined], axis=-1), f"mp{i}.user_update")
        pooled = ad.max_pool(self._dense(state.r_user, f"mp{i}.irs_msg"), axis=1)
        r_irs = self._dense(ad.concat([irs_t, pooled], axis=-1), f"mp{i}.irs_update")
        return GraphState(r_user, r_irs)

    def output_heads(self, state: GraphState, phi_fixed: np.ndarray | None = None):
        B, K, _ = state.r_user.shape
        M, N = self.spec.num_antennas, self.spec.num_elements
        variant = self.spec.variant

        if variant == "random_irs":
            if phi_fixed is None:
                raise ValueError("the random-IRS variant needs externally drawn phases")
            phi = ComplexTensor.from_numpy(phi_fixed)
        else:
            raw = ad.reshape(self._linear(state.r_irs, "head.phase"), (B, 2, N))
            pairs = ad.l2_normalize(ad.swapaxes(raw, 1, 2), axis=-1)  # B x N x (re, im)
            phi = ComplexTensor(pairs[..., 0], pairs[..., 1])

        if variant == "omni_beam":
            w = ComplexTensor.from_numpy(np.full((B, M, K), 1.0 / np.sqrt(M * K), dtype=complex))
        else:
            raw = ad.reshape(self._linear(state.r_user, "head.beam"), (B, K * 2 * M))
            stacked = ad.reshape(ad.l2_normalize(raw, axis=-1), (B, K, 2 * M))
            w = ComplexTensor(ad.swapaxes(stacked[:, :, :M], 1, 2), ad.swapaxes(stacked[:, :, M:], 1, 2))

        if variant == "average_power":
            a = Tensor(np.full((B, K), 1.0 / K))
        else:
            a = ad.softmax(ad.reshape(self._linear(state.r_user, "head.power"), (B, K)), axis=1)
        return w, a, phi

    # -- full map ------------------------------------------------------------

    def forward(self, y: np.ndarray, phi_fixed: np.ndarray | None = None):
        """Pilots (B, K, S) -> (w (B,M,K), a (B,K), phi (B,N)) as autodiff tensors."""
        if y.shape[1] < 1:
            raise ad.ShapeError("need at least one user")
        state = self.input_layer(self.features(y))
        for i in range(self.spec.layers):
            state = self.message_passing_layer(state, i)
        return self.output_heads(state, phi_fixed)

    def infer(self, y: np.ndarray, p_t: float, phi_fixed: np.ndarray | None = None) -> list[ResourceAllocation]:
        w, a, phi = self.forward(y, phi_fixed)
        W, A, P = w.numpy(), a.data, phi.numpy()
        return [ResourceAllocation(W[b], A[b], P[b], p_t) for b in range(W.shape[0])]

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for k, v in state.items():
            self.params[k].data = np.array(v, dtype=np.float64)

    def trainable(self) -> list[str]:
        """Names of parameters that can influence the loss under this variant."""
        skip = {"random_irs": "head.phase", "omni_beam": "head.beam", "average_power": "head.power"}
        prefix = skip.get(self.spec.variant)
        return [k for k in self.params if prefix is None or not k.startswith(prefix)]
