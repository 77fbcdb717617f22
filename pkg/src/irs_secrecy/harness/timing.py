"""Wall-clock comparison of data/model loading and per-test-set solve time."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Callable


@dataclass
class TimingRow:
    scheme: str
    samples: int
    load_seconds: float      # median over repetitions
    run_seconds: float       # median over repetitions
    repeats: int
    run_samples: list = field(default_factory=list)
    flag: str = ""

    @property
    def per_sample(self) -> float:
        return self.run_seconds / self.samples if self.samples else float("nan")


def time_scheme(name: str, load: Callable[[], object], run: Callable[[object], object], samples: int,
                repeats: int = 5) -> TimingRow:
    """``load()`` builds whatever ``run`` needs; both are timed separately."""
    if repeats < 5:
        raise ValueError("timing needs at least 5 repetitions")
    loads, runs = [], []
    for _ in range(repeats):
        t0 = time.perf_counter()
        state = load()
        t1 = time.perf_counter()
        run(state)
        t2 = time.perf_counter()
        loads.append(t1 - t0)
        runs.append(t2 - t1)
    return TimingRow(name, samples, statistics.median(loads), statistics.median(runs), repeats, runs)


def timing_compare(schemes: dict, samples: int, repeats: int = 5) -> list[TimingRow]:
    """``schemes`` maps name -> (load, run) or None for a scheme whose inputs are missing."""
    rows = []
    for name, fns in schemes.items():
        if fns is None:
            rows.append(TimingRow(name, samples, float("nan"), float("nan"), 0, flag="skipped: missing checkpoint"))
            continue
        rows.append(time_scheme(name, fns[0], fns[1], samples, repeats))
    return rows


TIMING_COLUMNS = ("scheme", "samples", "load_seconds", "run_seconds", "per_sample_seconds", "repeats", "flag")


def timing_table(rows) -> list[list]:
    return [[r.scheme, r.samples, f"{r.load_seconds:.6g}", f"{r.run_seconds:.6g}", f"{r.per_sample:.6g}",
             r.repeats, r.flag] for r in rows]
