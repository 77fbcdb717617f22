"""Sum-rate WMMSE beamforming for SIC receivers at fixed (a, phi).

Per rank r the receiver sees streams r..K-1 (weaker-rank streams already
cancelled), so the MMSE weights couple a beam only to the receivers that
still see it as interference.  With v_k = sqrt(P_t a_k) w_k the update is

    v_k = (sum_{r<=k} u_r |g_r|^2 h_r^* h_r^T + lam/(P_t a_k) I)^-1 u_k conj(g_k) h_k^*

and ``lam`` is bisected so that sum_k ||v_k||^2 / (P_t a_k) = 1, i.e. the
unit-norm beam matrix w carries exactly the allocated powers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channel import ChannelRealization
from ..secrecy import effective_gains, sic_order


@dataclass
class WMMSEConfig:
    inner_iterations: int = 50
    bisection_iterations: int = 30
    tolerance: float = 1e-9

    def validate(self) -> None:
        if self.inner_iterations < 1 or self.bisection_iterations < 1:
            raise ValueError("WMMSE iteration counts must be >= 1")


@dataclass
class WMMSEResult:
    w: np.ndarray
    trace: list = field(default_factory=list)  # legitimate sum rate after each iteration
    converged: bool = True
    flag: str = ""


def _rank_sinr(h: np.ndarray, v: np.ndarray, noise: float) -> np.ndarray:
    """SINR per rank; h rows and v columns are already in rank order."""
    p = np.abs(h @ v) ** 2
    K = h.shape[0]
    interf = np.array([p[r, r + 1:].sum() for r in range(K)])
    return np.diag(p) / (interf + noise)


def sum_rate(realization: ChannelRealization, w: np.ndarray, a: np.ndarray, phi: np.ndarray,
             p_t: float) -> float:
    perm = sic_order(effective_gains(realization, phi)).permutation
    h = realization.combined_user_channels(phi)[perm]
    v = w[:, perm] * np.sqrt(p_t * a[perm])
    return float(np.log2(1.0 + _rank_sinr(h, v, realization.noise_power)).sum())


def _beams(h, u, g, scale, lam):
    M, K = h.shape[1], h.shape[0]
    v = np.zeros((M, K), dtype=complex)
    acc = np.zeros((M, M), dtype=complex)
    for k in range(K):
        acc = acc + u[k] * abs(g[k]) ** 2 * np.outer(h[k].conj(), h[k])
        rhs = u[k] * np.conj(g[k]) * h[k].conj()
        v[:, k] = np.linalg.solve(acc + (lam / scale[k]) * np.eye(M), rhs)
    return v


def _budget(v, scale):
    return float(np.sum(np.sum(np.abs(v) ** 2, axis=0) / scale))


def wmmse_beamforming(realization: ChannelRealization, a: np.ndarray, phi: np.ndarray, p_t: float,
                      cfg: WMMSEConfig | None = None) -> WMMSEResult:
    cfg = cfg or WMMSEConfig()
    cfg.validate()
    M, N, K = realization.dims
    noise = realization.noise_power
    perm = sic_order(effective_gains(realization, phi)).permutation
    h = realization.combined_user_channels(phi)[perm]
    if not np.any(np.abs(h) > 0):
        w = np.zeros((M, K), dtype=complex)
        w[0, 0] = 1.0
        return WMMSEResult(w, [], True, "zero-channel")

    a_r = np.asarray(a, dtype=float)[perm]
    active = a_r > 0
    scale = p_t * np.where(active, a_r, 1.0)

    # matched-filter start
    w = h.conj().T / np.maximum(np.linalg.norm(h, axis=1), 1e-300)
    w = w / np.linalg.norm(w)
    v = w * np.sqrt(p_t * a_r)

    def rate_of(v):
        return float(np.log2(1.0 + _rank_sinr(h, v, noise)).sum())

    trace = [rate_of(v)]
    converged = False
    for _ in range(cfg.inner_iterations):
        p = np.abs(h @ v) ** 2
        total = np.array([p[r, r:].sum() for r in range(K)]) + noise
        amp = np.einsum("rm,mr->r", h, v)
        g = np.conj(amp) / total
        u = total / (total - np.abs(amp) ** 2)

        lo, hi = 0.0, 1.0
        while _budget(_beams(h, u, g, scale, hi) * active, scale) > 1.0 and hi < 1e30:
            hi *= 2.0
        for _ in range(cfg.bisection_iterations):
            mid = 0.5 * (lo + hi)
            try:
                over = _budget(_beams(h, u, g, scale, mid) * active, scale) > 1.0
            except np.linalg.LinAlgError:
                over = True
            lo, hi = (mid, hi) if over else (lo, mid)
        v_new = _beams(h, u, g, scale, hi) * active
        # fill any unused budget; scaling all beams up never lowers an SINR
        budget = _budget(v_new, scale)
        if budget > 0:
            v_new = v_new / np.sqrt(budget)
        trace.append(rate_of(v_new))
        step = abs(trace[-1] - trace[-2])
        v = v_new
        if step <= cfg.tolerance * max(1.0, abs(trace[-1])):
            converged = True
            break

    w = v / np.sqrt(scale)
    w[:, ~active] = 0.0
    nrm = np.linalg.norm(w)
    if nrm == 0:
        w = np.zeros((M, K), dtype=complex)
        w[0, 0] = 1.0
    else:
        w = w / nrm
    out = np.zeros_like(w)
    out[:, perm] = w
    return WMMSEResult(out, trace, converged, "" if converged else "max-iterations")
