"""Secrecy-rate sweeps over P_t, N or M for every requested scheme.

Two CSV files are written per sweep:

``sweep.csv`` (deterministic, byte-identical for identical config and seed)
    scheme, variable, value, mean_sum_secrecy, std_error, samples, seed, flag
``sweep_timing.csv`` (wall clock, varies run to run)
    scheme, variable, value, load_seconds, run_seconds
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..baselines import alternating_optimize
from ..channel import derive_seed
from ..cognn import evaluate, train
from ..dataset import TEST, TRAIN, Dataset, build_dataset
from ..secrecy import objective
from .config import ExperimentConfig

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("scheme", "variable", "value", "mean_sum_secrecy", "std_error", "samples", "seed", "flag")
TIMING_COLUMNS = ("scheme", "variable", "value", "load_seconds", "run_seconds")
VARIANT_OF = {"cognn": None, "avg_power": "average_power", "random_irs": "random_irs", "omni_beam": "omni_beam"}


@dataclass
class ResultRow:
    scheme: str
    variable: str
    value: float
    mean_sum_secrecy: float
    std_error: float
    samples: int
    seed: int
    load_seconds: float = 0.0
    run_seconds: float = 0.0
    flag: str = ""

    def csv_fields(self) -> list:
        if self.flag.startswith("failed"):
            return [self.scheme, self.variable, _fmt(self.value), "", "", self.samples, self.seed, self.flag]
        return [self.scheme, self.variable, _fmt(self.value), f"{self.mean_sum_secrecy:.10g}",
                f"{self.std_error:.10g}", self.samples, self.seed, self.flag]


def _fmt(value: float) -> str:
    return f"{value:g}"


def datasets(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    """Training set and the held-out set shared by every scheme at this sweep point."""
    fading = cfg.fading()
    tr = build_dataset(fading, cfg.train_samples, cfg.root_seed, TRAIN, cfg.num_users, cfg.geometry, p_t=cfg.p_t)
    te = build_dataset(fading, cfg.test_samples, cfg.root_seed, TEST, cfg.num_users, cfg.geometry, p_t=cfg.p_t)
    return tr, te


def _stats(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    sem = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return float(np.mean(values)), sem


def run_scheme(scheme: str, cfg: ExperimentConfig, tr: Dataset, te: Dataset, ckpt_dir: Path | None = None):
    """Mean sum secrecy on the held-out set plus (load, run) seconds and a flag."""
    scenario = cfg.scenario_obj()
    if scheme == "ao":
        n = min(cfg.ao_samples, len(te))
        t0 = time.perf_counter()
        vals = []
        for i in range(n):
            res = alternating_optimize(te.realizations[i], scenario, cfg.p_t, cfg.ao, derive_seed(cfg.root_seed, i, 200))
            vals.append(objective(te.realizations[i], res.allocation, scenario).sum_secrecy)
        flag = "" if n == len(te) else f"first {n} test samples"
        return np.array(vals), 0.0, time.perf_counter() - t0, flag

    t0 = time.perf_counter()
    tcfg = replace(cfg.train, root_seed=cfg.root_seed, train_samples=cfg.train_samples)
    ckpt, report = train(tr, scenario, tcfg, cfg.p_t, variant=VARIANT_OF[scheme],
                         context={"sweep": cfg.sweep_variable, "value": getattr(cfg, cfg.sweep_variable)})
    if ckpt_dir is not None:
        ckpt.save(ckpt_dir / f"ckpt_{scheme}_{cfg.sweep_variable}_{_fmt(getattr(cfg, cfg.sweep_variable))}.bin")
    t1 = time.perf_counter()
    vals = evaluate(ckpt.model(), te, scenario, cfg.p_t)
    return vals, t1 - t0, time.perf_counter() - t1, report.stop_reason


def run_point(cfg: ExperimentConfig, value, ckpt_dir: Path | None = None) -> list[ResultRow]:
    point = cfg.at(value)
    t0 = time.perf_counter()
    tr, te = datasets(point)
    data_seconds = time.perf_counter() - t0
    rows = []
    for scheme in cfg.schemes:
        try:
            vals, load_s, run_s, flag = run_scheme(scheme, point, tr, te, ckpt_dir)
            if not np.all(np.isfinite(vals)) or np.any(vals < 0):
                raise FloatingPointError("non-finite or negative secrecy rate")
            mean, sem = _stats(vals)
            rows.append(ResultRow(scheme, cfg.sweep_variable, float(value), mean, sem, len(vals), cfg.root_seed,
                                  data_seconds + load_s, run_s, flag))
        except Exception as exc:  # a failing scheme must not stop the sweep
            log.warning("scheme %s at %s=%s failed: %s", scheme, cfg.sweep_variable, value, exc)
            rows.append(ResultRow(scheme, cfg.sweep_variable, float(value), float("nan"), float("nan"), 0,
                                  cfg.root_seed, flag=f"failed: {type(exc).__name__}: {exc}"))
    return rows


def write_results(out_dir: Path, rows: list[ResultRow]) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    main, timing = out_dir / "sweep.csv", out_dir / "sweep_timing.csv"
    with open(main, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        w.writerows(r.csv_fields() for r in rows)
    with open(timing, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        w.writerows([r.scheme, r.variable, _fmt(r.value), f"{r.load_seconds:.6g}", f"{r.run_seconds:.6g}"]
                    for r in rows)
    return main, timing


def run_sweep(cfg: ExperimentConfig, parallel: bool = False, save_checkpoints: bool = True) -> list[ResultRow]:
    cfg.validate()
    out_dir = cfg.out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_dir = out_dir if save_checkpoints else None
    if parallel and len(cfg.sweep_values) > 1:
        with ProcessPoolExecutor() as pool:
            parts = list(pool.map(run_point, [cfg] * len(cfg.sweep_values), cfg.sweep_values,
                                  [ckpt_dir] * len(cfg.sweep_values)))
    else:
        parts = [run_point(cfg, v, ckpt_dir) for v in cfg.sweep_values]
    rows = [r for part in parts for r in part]
    write_results(out_dir, rows)
    return rows
