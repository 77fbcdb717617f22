"""Three-stage alternating optimisation: WMMSE beams, RCG phases, GA powers."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..channel import ChannelRealization, make_rng
from ..secrecy import ResourceAllocation, Scenario, objective
from .ga import GAConfig, ga_power
from .rcg import RCGConfig, rcg_phase
from .wmmse import WMMSEConfig, wmmse_beamforming


@dataclass
class AOConfig:
    outer_rounds: int = 5
    wmmse: WMMSEConfig = field(default_factory=WMMSEConfig)
    rcg: RCGConfig = field(default_factory=RCGConfig)
    ga: GAConfig = field(default_factory=GAConfig)

    def validate(self) -> None:
        if self.outer_rounds < 1:
            raise ValueError("outer_rounds must be >= 1")
        self.wmmse.validate()
        self.rcg.validate()
        self.ga.validate()


@dataclass
class AOResult:
    allocation: ResourceAllocation
    trace: list = field(default_factory=list)  # incumbent sum secrecy at the end of each round
    stages: list = field(default_factory=list)  # (round, stage, objective after stage)
    flags: list = field(default_factory=list)

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["round", "stage", "sum_secrecy"])
            out.writerows(self.stages)


def alternating_optimize(realization: ChannelRealization, scenario: Scenario, p_t: float,
                         cfg: AOConfig | None = None, rng_seed: int = 0) -> AOResult:
    cfg = cfg or AOConfig()
    cfg.validate()
    M, N, K = realization.dims
    a = np.full(K, 1.0 / K)
    phi = np.ones(N, dtype=complex)
    w = wmmse_beamforming(realization, a, phi, p_t, cfg.wmmse).w
    best = ResourceAllocation(w, a, phi, p_t)
    best_val = objective(realization, best, scenario).sum_secrecy
    result = AOResult(best, [], [(0, "init", best_val)])
    # per-round GA keys drawn from the run's own stream; rng_seed may use the full 128-bit key space
    ga_seeds = make_rng(rng_seed).integers(0, 2 ** 63, size=cfg.outer_rounds)

    for rnd in range(1, cfg.outer_rounds + 1):
        wr = wmmse_beamforming(realization, best.a, best.phi, p_t, cfg.wmmse)
        if wr.flag:
            result.flags.append(f"round {rnd} wmmse: {wr.flag}")
        cur = ResourceAllocation(wr.w, best.a, best.phi, p_t)
        result.stages.append((rnd, "wmmse", objective(realization, cur, scenario).sum_secrecy))

        rr = rcg_phase(realization, cur.w, cur.a, cur.phi, p_t, scenario, cfg.rcg)
        if rr.flag:
            result.flags.append(f"round {rnd} rcg: {rr.flag}")
        cur = ResourceAllocation(cur.w, cur.a, rr.phi, p_t)
        result.stages.append((rnd, "rcg", objective(realization, cur, scenario).sum_secrecy))

        gr = ga_power(realization, cur.w, cur.phi, p_t, scenario, cfg.ga, int(ga_seeds[rnd - 1]),
                      incumbent=cur.a)
        cur = ResourceAllocation(cur.w, gr.a, cur.phi, p_t)
        val = objective(realization, cur, scenario).sum_secrecy
        result.stages.append((rnd, "ga", val))

        # keep the incumbent unless the round improved on it
        if val >= best_val:
            best, best_val = cur, val
        result.trace.append(best_val)

    bad = [k for k, v in best.violations().items() if v]
    if bad:
        warnings.warn(f"AO allocation violates {bad}")
        result.flags.append("constraint-violation")
    result.allocation = best
    return result
