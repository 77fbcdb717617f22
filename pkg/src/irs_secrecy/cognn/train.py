"""Mini-batch Adam training on the negative sum secrecy rate."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .. import autodiff as ad
from ..autodiff import AdamState
from ..channel import derive_seed, make_rng
from ..dataset import Dataset
from ..secrecy import Scenario, objective_graph
from .checkpoint import Checkpoint, config_digest
from .model import CoGNN, ModelSpec

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 32
    max_epochs: int = 100
    iterations_per_epoch: int = 100
    train_samples: int = 10000
    patience: int = 30
    root_seed: int = 0
    d_mlp: int = 512
    layers: int = 2


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    mean_secrecy: float
    wall_clock: float


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    stop_reason: str = "max-epochs"
    best_epoch: int = -1
    best_loss: float = math.inf
    final_eval: float | None = None
    root_seed: int = 0

    def trajectory(self) -> list[tuple]:
        """Everything except wall-clock timings, for reproducibility checks."""
        return [(e.epoch, e.mean_loss, e.mean_secrecy) for e in self.epochs] + [
            (self.stop_reason, self.best_epoch, self.best_loss, self.final_eval, self.root_seed)]


class TrainingDiverged(RuntimeError):
    def __init__(self, message: str, checkpoint: Checkpoint | None = None):
        super().__init__(message)
        self.checkpoint = checkpoint


class EarlyStopping:
    """Tracks the best loss; signals a stop after ``patience`` non-improving epochs."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.best_epoch = -1
        self.stale = 0

    def update(self, epoch: int, loss: float) -> bool:
        """Record an epoch loss; returns True when it is a new best."""
        if loss < self.best:
            self.best, self.best_epoch, self.stale = loss, epoch, 0
            return True
        self.stale += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.stale >= self.patience


def run_epochs(epoch_fn: Callable[[int], tuple[float, float]], max_epochs: int, patience: int,
               on_best: Callable[[int], None] | None = None, report: TrainReport | None = None) -> TrainReport:
    """Drive ``epoch_fn`` until ``max_epochs`` or the patience limit."""
    report = report or TrainReport()
    stopper = EarlyStopping(patience)
    for epoch in range(max_epochs):
        t0 = time.perf_counter()
        loss, secrecy = epoch_fn(epoch)
        report.epochs.append(EpochRecord(epoch, loss, secrecy, time.perf_counter() - t0))
        if stopper.update(epoch, loss) and on_best is not None:
            on_best(epoch)
        if stopper.should_stop:
            report.stop_reason = "patience"
            break
    report.best_epoch, report.best_loss = stopper.best_epoch, stopper.best
    return report


def feature_scale(pilots: np.ndarray) -> float:
    x = np.concatenate([pilots.real, pilots.imag], axis=-1)
    rms = float(np.sqrt(np.mean(x ** 2)))
    return rms if rms > 0 else 1.0


def training_loss(model: CoGNN, data: Dataset, scenario: Scenario, p_t: float):
    """Mean penalised loss over a batch plus the per-sample sum secrecy rates."""
    w, a, phi = model.forward(data.pilots, data.random_phi)
    res = objective_graph(data.channels, w, a, phi, scenario, p_t)
    return ad.mean(res.penalized_loss), res.sum_secrecy.data


def evaluate(model: CoGNN, data: Dataset, scenario: Scenario, p_t: float, chunk: int = 256) -> np.ndarray:
    """Per-sample sum secrecy rate of the model's allocations."""
    out = []
    for start in range(0, len(data), chunk):
        part = data.take(np.arange(start, min(start + chunk, len(data))))
        out.append(training_loss(model, part, scenario, p_t)[1])
    return np.concatenate(out)


def _batch_indices(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    reps = -(-count // n)
    return np.concatenate([rng.permutation(n) for _ in range(reps)])[:count]


def train(data: Dataset, scenario: Scenario, config: TrainConfig, p_t: float, variant: str | None = None,
          holdout: Dataset | None = None, context: dict | None = None) -> tuple[Checkpoint, TrainReport]:
    """Train a CO-GNN (or a frozen-head variant) on ``data``.

    The returned checkpoint holds the best-loss epoch, not the last one.
    """
    M, N, K = data.channels.dims
    spec = ModelSpec(M, N, K, data.pilots.shape[2], config.d_mlp, config.layers,
                     feature_scale(data.pilots), variant)
    root = config.root_seed
    model = CoGNN(spec, seed=derive_seed(root, 0, 64))
    names = model.trainable()
    params = [model.params[n] for n in names]
    state = AdamState(learning_rate=config.learning_rate)
    order_rng = make_rng(derive_seed(root, 0, 65))
    digest = config_digest({"train": asdict(config), "scenario": asdict(scenario), "p_t": p_t,
                            "variant": variant, **(context or {})})
    best = {"params": model.state_dict(), "epoch": -1, "loss": math.inf}

    def epoch_fn(epoch: int) -> tuple[float, float]:
        idx = _batch_indices(order_rng, len(data), config.iterations_per_epoch * config.batch_size)
        losses, secrecies = [], []
        for it in range(config.iterations_per_epoch):
            batch = data.take(idx[it * config.batch_size:(it + 1) * config.batch_size])
            loss, sec = training_loss(model, batch, scenario, p_t)
            if not np.isfinite(loss.data):
                ckpt = Checkpoint(spec, model.state_dict(), digest, epoch, math.nan, root)
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}, iteration {it}", ckpt)
            grads = ad.grad(loss, params)
            ad.adam_step(params, grads, state)
            losses.append(float(loss.data))
            secrecies.append(float(sec.mean()))
        mean_loss = float(np.mean(losses))
        log.debug("epoch %d loss %.5f secrecy %.5f", epoch, mean_loss, float(np.mean(secrecies)))
        best["pending"] = mean_loss
        return mean_loss, float(np.mean(secrecies))

    def on_best(epoch: int) -> None:
        best.update(params=model.state_dict(), epoch=epoch, loss=best["pending"])

    report = run_epochs(epoch_fn, config.max_epochs, config.patience, on_best, TrainReport(root_seed=root))
    ckpt = Checkpoint(spec, best["params"], digest, max(best["epoch"], 0), best["loss"], root)
    if holdout is not None:
        report.final_eval = float(evaluate(ckpt.model(), holdout, scenario, p_t).mean())
    return ckpt, report
