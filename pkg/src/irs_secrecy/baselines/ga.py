"""Genetic search for the NOMA power split at fixed (w, phi)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channel import ChannelRealization, make_rng
from ..secrecy import PowerFitness, Scenario


@dataclass
class GAConfig:
    population: int = 50
    generations: int = 100
    crossover_rate: float = 0.9
    mutation_scale: float = 0.1
    elitism: int = 2
    tournament: int = 3

    def validate(self) -> None:
        if self.population < 2 or self.generations < 1 or self.tournament < 1:
            raise ValueError("GA population >= 2 and generations, tournament >= 1 required")
        if not 1 <= self.elitism <= self.population:
            raise ValueError("elitism must be in [1, population]")
        if not 0 <= self.crossover_rate <= 1 or self.mutation_scale < 0:
            raise ValueError("bad crossover rate or mutation scale")


@dataclass
class GAResult:
    a: np.ndarray
    fitness: float
    trace: list = field(default_factory=list)  # best fitness per generation


def project_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    K = x.shape[1]
    s = -np.sort(-x, axis=1)
    css = np.cumsum(s, axis=1) - 1.0
    idx = np.arange(1, K + 1)
    rho = np.sum(s - css / idx > 0, axis=1)
    theta = css[np.arange(len(x)), rho - 1] / rho
    out = np.maximum(x - theta[:, None], 0.0)
    return out / out.sum(axis=1, keepdims=True)


def ga_power(realization: ChannelRealization, w: np.ndarray, phi: np.ndarray, p_t: float, scenario: Scenario,
             cfg: GAConfig | None = None, rng_seed: int = 0, incumbent: np.ndarray | None = None) -> GAResult:
    cfg = cfg or GAConfig()
    cfg.validate()
    K = realization.dims[2]
    rng = make_rng(rng_seed)
    fitness = PowerFitness(realization, w, phi, p_t, scenario)

    pop = rng.dirichlet(np.ones(K), size=cfg.population)
    if incumbent is not None:
        pop[0] = project_simplex(incumbent)[0]
    score = fitness(pop)
    trace = [float(score.max())]
    for _ in range(cfg.generations):
        elite = pop[np.argsort(-score, kind="stable")[:cfg.elitism]]
        n_child = cfg.population - cfg.elitism

        def pick(count):
            cand = rng.integers(0, cfg.population, size=(count, cfg.tournament))
            return cand[np.arange(count), np.argmax(score[cand], axis=1)]

        mothers, fathers = pop[pick(n_child)], pop[pick(n_child)]
        mix = rng.uniform(-0.25, 1.25, size=(n_child, 1))
        cross = rng.random(n_child) < cfg.crossover_rate
        children = np.where(cross[:, None], mix * mothers + (1 - mix) * fathers, mothers)
        children = project_simplex(children + cfg.mutation_scale * rng.standard_normal(children.shape))
        pop = np.vstack([elite, children])
        score = fitness(pop)
        trace.append(float(score.max()))

    best = int(np.argmax(score))
    return GAResult(pop[best].copy(), float(score[best]), trace)
