from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, grad


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: int
    worst_index: tuple
    analytic: float
    numeric: float

    def passed(self, tolerance: float) -> bool:
        return self.max_rel_error < tolerance


def grad_check(fn: Callable[..., Tensor], point: Sequence[np.ndarray], tolerance: float | None = None,
               h: float = 1e-5, floor: float = 1e-8) -> GradCheckReport:
    """Compare reverse-mode gradients of a scalar ``fn`` to central differences.

    ``fn`` receives one Tensor per array in ``point``.  The relative error of a
    coordinate is ``|a - n| / max(|a|, |n|, floor)``; the worst coordinate is
    reported.  If ``tolerance`` is given and exceeded, AssertionError is raised.
    """
    arrays = [np.array(p, dtype=np.float64) for p in point]
    params = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    out = fn(*params)
    if out.data.size != 1 or not np.isfinite(out.data).all():
        raise FloatingPointError(f"grad_check: function value {out.data!r} is not a finite scalar")
    analytic = grad(out, params)

    def value(i, idx, delta):
        shifted = [a.copy() for a in arrays]
        shifted[i][idx] += delta
        v = float(fn(*[Tensor(s) for s in shifted]).data)
        if not np.isfinite(v):
            raise FloatingPointError(f"grad_check: non-finite value at perturbed coordinate {i}{idx}")
        return v

    worst = GradCheckReport(0.0, 0, (), 0.0, 0.0)
    for i, a in enumerate(arrays):
        for idx in np.ndindex(a.shape):
            num = (value(i, idx, h) - value(i, idx, -h)) / (2 * h)
            ana = float(analytic[i][idx])
            rel = abs(ana - num) / max(abs(ana), abs(num), floor)
            if rel > worst.max_rel_error or worst.worst_index == ():
                worst = GradCheckReport(rel, i, idx, ana, num)
    if tolerance is not None and not worst.passed(tolerance):
        raise AssertionError(f"gradient check failed: {worst}")
    return worst
