"""Riemannian conjugate gradient over unit-modulus IRS phases.

Minimises the negative sum secrecy rate on the product of N unit circles.
Gradients come from the autodiff objective graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..autodiff import ComplexTensor, Tensor
from ..channel import ChannelRealization
from ..secrecy import ChannelBatch, Scenario, objective_graph


@dataclass
class RCGConfig:
    max_iterations: int = 200
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 40
    grad_tolerance: float = 1e-8

    def validate(self) -> None:
        if self.max_iterations < 1 or self.max_backtracks < 1:
            raise ValueError("RCG iteration counts must be >= 1")
        if not (0 < self.armijo_c < 1 and 0 < self.backtrack < 1):
            raise ValueError("Armijo parameters must lie in (0, 1)")


@dataclass
class RCGResult:
    phi: np.ndarray
    trace: list = field(default_factory=list)  # sum secrecy rate after each accepted step
    iterates: list = field(default_factory=list)
    flag: str = ""


def project_tangent(phi: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Remove the radial component of ``g`` at every element of ``phi``."""
    return g - np.real(g * np.conj(phi)) * phi


def retract(z: np.ndarray) -> np.ndarray:
    return z / np.abs(z)


class PhaseObjective:
    """Negative sum secrecy rate and its Euclidean gradient as a function of phi."""

    def __init__(self, realization: ChannelRealization, w: np.ndarray, a: np.ndarray, p_t: float,
                 scenario: Scenario):
        self.batch = ChannelBatch.stack([realization])
        self.w = ComplexTensor.from_numpy(np.asarray(w)[None])
        self.a = Tensor(np.asarray(a, dtype=float)[None])
        self.p_t = p_t
        self.scenario = scenario

    def _loss(self, phi: np.ndarray, requires_grad: bool):
        ph = ComplexTensor.from_numpy(phi[None], requires_grad)
        res = objective_graph(self.batch, self.w, self.a, ph, self.scenario, self.p_t)
        return ad.tsum(res.sum_secrecy) * -1.0, ph

    def value(self, phi: np.ndarray) -> float:
        return float(self._loss(phi, False)[0].data)

    def value_and_grad(self, phi: np.ndarray) -> tuple[float, np.ndarray]:
        loss, ph = self._loss(phi, True)
        g_re, g_im = ad.grad(loss, [ph.re, ph.im])
        return float(loss.data), (g_re + 1j * g_im)[0]


def rcg_phase(realization: ChannelRealization, w: np.ndarray, a: np.ndarray, phi_init: np.ndarray,
              p_t: float, scenario: Scenario, cfg: RCGConfig | None = None) -> RCGResult:
    cfg = cfg or RCGConfig()
    cfg.validate()
    fn = PhaseObjective(realization, w, a, p_t, scenario)
    phi = retract(np.asarray(phi_init, dtype=complex))
    f, egrad = fn.value_and_grad(phi)
    grad = project_tangent(phi, egrad)
    direction = -grad
    step = cfg.initial_step
    result = RCGResult(phi.copy(), [-f], [phi.copy()])

    for _ in range(cfg.max_iterations):
        gnorm2 = float(np.real(np.vdot(grad, grad)))
        if np.sqrt(gnorm2) < cfg.grad_tolerance:
            break
        slope = float(np.real(np.vdot(grad, direction)))
        if slope >= 0:
            direction, slope = -grad, -gnorm2
        accepted = None
        for attempt in range(2):
            t = step
            for _ in range(cfg.max_backtracks):
                cand = retract(phi + t * direction)
                f_cand = fn.value(cand)
                if f_cand <= f + cfg.armijo_c * t * slope:
                    accepted = (cand, f_cand, t)
                    break
                t *= cfg.backtrack
            if accepted is not None or attempt == 1:
                break
            # conjugate direction failed: fall back to steepest descent
            direction, slope = -grad, -gnorm2
            result.flag = "steepest-fallback"
        if accepted is None:
            result.flag = "line-search-failed"
            break
        phi_new, f, t = accepted
        step = min(t / cfg.backtrack, 1e3)
        _, egrad = fn.value_and_grad(phi_new)
        grad_new = project_tangent(phi_new, egrad)
        # transport by projection, Polak-Ribiere coefficient clipped at zero
        old_grad = project_tangent(phi_new, grad)
        old_dir = project_tangent(phi_new, direction)
        beta = max(0.0, float(np.real(np.vdot(grad_new, grad_new - old_grad))) / gnorm2) if gnorm2 > 0 else 0.0
        direction = -grad_new + beta * old_dir
        phi, grad = phi_new, grad_new
        result.trace.append(-f)
        result.iterates.append(phi.copy())

    result.phi = phi
    return result
