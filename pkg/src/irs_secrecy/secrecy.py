"""SIC ordering, SINRs, secrecy rates and the sum-secrecy objective.

Two evaluation paths share one set of formulas:

* plain numpy functions on a single :class:`ChannelRealization`
  (``effective_gains`` ... ``objective``), and
* :func:`objective_graph`, the same quantities over a :class:`ChannelBatch`
  built from autodiff tensors so that gradients reach ``w``, ``a`` and ``phi``.

Ranks are 0-based: rank 0 is the strongest user and is decoded treating
ranks 1..K-1 as interference; the weakest rank sees noise only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import ComplexTensor, Tensor
from .channel import ChannelRealization

STRUCTURE_TOL = 1e-6


@dataclass
class ResourceAllocation:
    w: np.ndarray    # M x K complex, unit Frobenius norm
    a: np.ndarray    # K power fractions on the simplex
    phi: np.ndarray  # N unit-modulus reflection coefficients
    p_t: float

    def violations(self, tol: float = STRUCTURE_TOL) -> dict:
        return {
            "simplex": bool(abs(self.a.sum() - 1.0) > tol or (self.a < -tol).any() or (self.a > 1 + tol).any()),
            "norm": bool(abs(np.linalg.norm(self.w) - 1.0) > tol),
            "modulus": bool((np.abs(np.abs(self.phi) - 1.0) > tol).any()),
        }


@dataclass
class Scenario:
    kind: str = "external"         # "external" | "internal"
    eve_index: int | None = None   # internal eavesdropping user (0-based)
    r_min: float = 0.0
    penalty_weight: float = 0.0

    def __post_init__(self):
        if self.kind not in ("external", "internal"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "internal" and self.eve_index is None:
            raise ValueError("internal scenario needs the eavesdropping user's index")
        if self.r_min < 0 or self.penalty_weight < 0:
            raise ValueError("r_min and penalty_weight must be nonnegative")

    @classmethod
    def internal(cls, eve_index: int, **kw) -> "Scenario":
        return cls("internal", eve_index, **kw)


@dataclass
class OrderedUsers:
    permutation: np.ndarray  # user index at each rank, strongest first
    gains: np.ndarray        # gains along the permutation (non-increasing)


@dataclass
class ConstraintReport:
    simplex: bool = False
    norm: bool = False
    modulus: bool = False
    ordering: bool = False
    r_min: bool = False

    @property
    def any(self) -> bool:
        return self.simplex or self.norm or self.modulus or self.ordering or self.r_min

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("simplex", "norm", "modulus", "ordering", "r_min")}


@dataclass
class ObjectiveResult:
    sum_secrecy: float
    penalized_loss: float
    report: ConstraintReport
    secrecy: np.ndarray = field(default_factory=lambda: np.zeros(0))


def effective_gains(realization: ChannelRealization, phi: np.ndarray) -> np.ndarray:
    M, N, K = realization.dims
    phi = np.asarray(phi)
    if phi.shape != (N,):
        raise ValueError(f"phi has shape {phi.shape}, expected ({N},)")
    h = realization.combined_user_channels(phi)
    return np.sum(np.abs(h) ** 2, axis=1)


def sic_order(gains) -> OrderedUsers:
    """Descending sort, ties broken by ascending user index."""
    gains = np.asarray(gains, dtype=float)
    perm = np.argsort(-gains, kind="stable")
    return OrderedUsers(perm, gains[perm])


def _sinr(h: np.ndarray, alloc: ResourceAllocation, order: OrderedUsers, k: int, noise: float) -> float:
    if not noise > 0:
        raise ValueError("noise power must be positive")
    perm = order.permutation
    amp = h @ alloc.w  # h^T w_i for every user i
    power = np.abs(amp) ** 2
    target = perm[k]
    interference = sum(alloc.a[i] * alloc.p_t * power[i] for i in perm[k + 1:])
    return float(alloc.a[target] * alloc.p_t * power[target] / (interference + noise))


def sinr_legitimate(realization: ChannelRealization, alloc: ResourceAllocation, order: OrderedUsers,
                    k: int) -> float:
    """SINR of the rank-``k`` user decoding its own stream."""
    h = realization.combined_user_channels(alloc.phi)[order.permutation[k]]
    return _sinr(h, alloc, order, k, realization.noise_power)


def eavesdropper_channel(realization: ChannelRealization, phi: np.ndarray, scenario: Scenario) -> np.ndarray:
    if scenario.kind == "external":
        return realization.combined_eve_channel(phi)
    return realization.combined_user_channels(phi)[scenario.eve_index]


def sinr_eavesdrop(realization: ChannelRealization, alloc: ResourceAllocation, order: OrderedUsers,
                   k: int, scenario: Scenario) -> float:
    """SINR of the eavesdropper decoding the rank-``k`` user's stream, same SIC order."""
    if scenario.kind == "internal" and order.permutation[k] == scenario.eve_index:
        raise ValueError("the internal eavesdropper cannot target its own stream")
    h = eavesdropper_channel(realization, alloc.phi, scenario)
    return _sinr(h, alloc, order, k, realization.noise_power)


def rate(sinr: float) -> float:
    if sinr < 0:
        raise ValueError(f"negative SINR {sinr}")
    return float(np.log2(1.0 + sinr))


def secrecy_rates(realization: ChannelRealization, alloc: ResourceAllocation, scenario: Scenario) -> np.ndarray:
    """Per-user secrecy rate, indexed by user (not rank)."""
    order = sic_order(effective_gains(realization, alloc.phi))
    K = realization.dims[2]
    out = np.zeros(K)
    for k in range(K):
        user = order.permutation[k]
        r_legit = rate(sinr_legitimate(realization, alloc, order, k))
        if scenario.kind == "internal" and user == scenario.eve_index:
            out[user] = r_legit
            continue
        r_eve = rate(sinr_eavesdrop(realization, alloc, order, k, scenario))
        out[user] = max(0.0, r_legit - r_eve)
    return out


def objective(realization: ChannelRealization, alloc: ResourceAllocation, scenario: Scenario) -> ObjectiveResult:
    sec = secrecy_rates(realization, alloc, scenario)
    total = float(sec.sum())
    shortfall = np.maximum(0.0, scenario.r_min - sec)
    loss = -total + scenario.penalty_weight * float(shortfall.sum())
    flags = alloc.violations()
    order = sic_order(effective_gains(realization, alloc.phi))
    report = ConstraintReport(
        simplex=flags["simplex"], norm=flags["norm"], modulus=flags["modulus"],
        ordering=bool(np.any(np.diff(order.gains) > 0)),
        r_min=bool((sec < scenario.r_min).any()),
    )
    return ObjectiveResult(total, loss, report, sec)


class PowerFitness:
    """Sum secrecy rate as a function of ``a`` only, for fixed (w, phi).

    The SIC order and all |h^T w|^2 terms are independent of ``a``, so they are
    computed once and populations of power vectors are scored in one shot.
    """

    def __init__(self, realization: ChannelRealization, w: np.ndarray, phi: np.ndarray, p_t: float,
                 scenario: Scenario):
        self.order = sic_order(effective_gains(realization, phi))
        perm = self.order.permutation
        h = realization.combined_user_channels(phi)[perm]
        self.power = (np.abs(h @ w) ** 2)[:, perm]  # rank x rank
        he = eavesdropper_channel(realization, phi, scenario)
        self.eve_power = (np.abs(he @ w) ** 2)[perm]
        self.p_t = p_t
        self.noise = realization.noise_power
        self.scenario = scenario
        self.eve_mask = np.ones(len(perm))
        if scenario.kind == "internal":
            self.eve_mask[perm == scenario.eve_index] = 0.0

    def per_rank(self, a: np.ndarray) -> np.ndarray:
        """Secrecy rate per rank for a (P, K) population of user-indexed power vectors."""
        a = np.atleast_2d(a)[:, self.order.permutation]
        K = a.shape[1]
        upper = np.triu(np.ones((K, K)), k=1)
        diag = np.diagonal(self.power)
        interf = (a[:, None, :] * self.power[None] * upper).sum(-1)
        gamma = a * self.p_t * diag / (self.p_t * interf + self.noise)
        interf_e = (a[:, None, :] * self.eve_power[None, None, :] * upper).sum(-1)
        gamma_e = a * self.p_t * self.eve_power / (self.p_t * interf_e + self.noise)
        r_eve = np.log2(1.0 + gamma_e) * self.eve_mask
        return np.maximum(0.0, np.log2(1.0 + gamma) - r_eve)

    def __call__(self, a: np.ndarray) -> np.ndarray:
        return self.per_rank(a).sum(axis=1)


# --- batched graph path -----------------------------------------------------

@dataclass
class ChannelBatch:
    g: np.ndarray            # B x M x N
    h_direct: np.ndarray     # B x K x M
    h_irs_user: np.ndarray   # B x K x N
    h_eve_direct: np.ndarray  # B x M
    h_eve_irs: np.ndarray     # B x N
    noise_power: float

    @classmethod
    def stack(cls, realizations) -> "ChannelBatch":
        rs = list(realizations)
        return cls(np.stack([r.g for r in rs]), np.stack([r.h_direct for r in rs]),
                   np.stack([r.h_irs_user for r in rs]), np.stack([r.h_eve_direct for r in rs]),
                   np.stack([r.h_eve_irs for r in rs]), rs[0].noise_power)

    def take(self, idx) -> "ChannelBatch":
        return ChannelBatch(self.g[idx], self.h_direct[idx], self.h_irs_user[idx], self.h_eve_direct[idx],
                            self.h_eve_irs[idx], self.noise_power)

    def __len__(self) -> int:
        return self.g.shape[0]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.g.shape[1], self.g.shape[2], self.h_direct.shape[1]


@dataclass
class GraphObjective:
    sum_secrecy: Tensor     # (B,)
    penalized_loss: Tensor  # (B,)
    secrecy: Tensor         # (B, K) by rank
    permutation: np.ndarray  # (B, K)


def _combined(h_d: np.ndarray, h_r: np.ndarray, g_t: ComplexTensor, phi: ComplexTensor) -> ComplexTensor:
    # rows of (h_r * phi) @ G^T are G diag(phi) h_r
    reflected = ComplexTensor.from_numpy(h_r) * phi
    return ComplexTensor.from_numpy(h_d) + reflected @ g_t


def objective_graph(batch: ChannelBatch, w: ComplexTensor, a: Tensor, phi: ComplexTensor,
                    scenario: Scenario, p_t: float) -> GraphObjective:
    """Sum secrecy rate and penalised loss for every sample of ``batch``.

    Shapes: ``w`` (B, M, K), ``a`` (B, K), ``phi`` (B, N).  The SIC order is
    read off the forward values and held fixed for differentiation.
    """
    B = len(batch)
    M, N, K = batch.dims
    noise = batch.noise_power
    g_t = ComplexTensor.from_numpy(np.swapaxes(batch.g, 1, 2))
    phi_row = phi.reshape((B, 1, N))
    h = _combined(batch.h_direct, batch.h_irs_user, g_t, phi_row)  # B x K x M

    gains = np.sum(h.re.data ** 2 + h.im.data ** 2, axis=2)
    perm = np.argsort(-gains, axis=1, kind="stable")

    power = (h @ w).abs2()  # B x K x K, [k, i] = |h_k^T w_i|^2
    power = ad.take_along_axis(power, np.broadcast_to(perm[:, :, None], (B, K, K)), axis=1)
    power = ad.take_along_axis(power, np.broadcast_to(perm[:, None, :], (B, K, K)), axis=2)
    a_ord = ad.take_along_axis(a, perm, axis=1)

    eye = np.eye(K)
    upper = np.triu(np.ones((K, K)), k=1)
    a_row = ad.reshape(a_ord, (B, 1, K))
    signal = ad.tsum(power * eye, axis=2)
    interf = ad.tsum(power * a_row * upper, axis=2)
    gamma = (a_ord * signal * p_t) / (interf * p_t + noise)
    r_legit = ad.log2_1p(gamma)

    if scenario.kind == "external":
        he = _combined(batch.h_eve_direct[:, None, :], batch.h_eve_irs[:, None, :], g_t, phi_row)
        eve_power = (he @ w).abs2()  # B x 1 x K
        eve_mask = np.ones((B, K))
    else:
        f = scenario.eve_index
        eve_power = (ComplexTensor(h.re[:, f:f + 1, :], h.im[:, f:f + 1, :]) @ w).abs2()
        eve_mask = (perm != f).astype(float)
    eve_power = ad.take_along_axis(eve_power, perm[:, None, :], axis=2)
    eve_signal = ad.reshape(eve_power, (B, K))
    eve_interf = ad.tsum(eve_power * a_row * upper, axis=2)
    gamma_e = (a_ord * eve_signal * p_t) / (eve_interf * p_t + noise)
    r_eve = ad.log2_1p(gamma_e) * eve_mask

    secrecy = ad.positive_part(r_legit - r_eve)
    total = ad.tsum(secrecy, axis=1)
    loss = -total
    if scenario.penalty_weight > 0:
        loss = loss + ad.tsum(ad.relu(scenario.r_min - secrecy), axis=1) * scenario.penalty_weight
    return GraphObjective(total, loss, secrecy, perm)


def allocation_tensors(alloc: ResourceAllocation, requires_grad: bool = False):
    """Single allocation as batch-of-one tensors (w, a, phi)."""
    w = ComplexTensor.from_numpy(alloc.w[None], requires_grad)
    a = Tensor(alloc.a[None].astype(float), requires_grad)
    phi = ComplexTensor.from_numpy(alloc.phi[None], requires_grad)
    return w, a, phi
