"""Reflected array gain of an IRS phase profile over receive directions.

For incidence direction (u1, v1) and probe direction (u2, v2), both given as
(sin az cos el, sin el) pairs,

    A = | sum_n phi_n exp(j pi (i1(n) (u2 - u1) + i2(n) (v2 - v1))) |

which is the magnitude of the LOS cascade BS -> IRS -> probe up to path loss.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from itertools import permutations

import numpy as np

from ..channel import (
    FadingConfig, Geometry, angles_from_geometry, default_pilots, derive_seed, fixed_geometry, irs_indices,
    sample_channels, steering_irs, synthesize_pilots,
)
from ..cognn import Checkpoint, infer

COLUMNS = ("sin_az_cos_el", "sin_el", "response")


@dataclass
class ResponseSurface:
    grid_u: np.ndarray     # sin(az)cos(el) samples
    grid_v: np.ndarray     # sin(el) samples
    values: np.ndarray     # len(grid_u) x len(grid_v)

    @property
    def step(self) -> float:
        return float(self.grid_u[1] - self.grid_u[0]) if len(self.grid_u) > 1 else 0.0


def make_grid(points: int = 101, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    return np.linspace(lo, hi, points)


def focusing_phases(incidence: tuple[float, float], target: tuple[float, float], n_elements: int) -> np.ndarray:
    """Phases that add every element coherently towards ``target``."""
    tau = (target[0] - incidence[0], target[1] - incidence[1])
    return np.conj(steering_irs(tau[0], tau[1], n_elements))


def array_response(phi: np.ndarray, incidence: tuple[float, float], grid_u, grid_v) -> ResponseSurface:
    phi = np.asarray(phi, dtype=complex)
    grid_u, grid_v = np.atleast_1d(np.asarray(grid_u, float)), np.atleast_1d(np.asarray(grid_v, float))
    if grid_u.size == 0 or grid_v.size == 0:
        raise ValueError("probe grid must be nonempty")
    i1, i2 = irs_indices(len(phi))
    tau1 = grid_u - incidence[0]
    tau2 = grid_v - incidence[1]
    row = phi[None, :] * np.exp(1j * np.pi * np.outer(tau1, i1))  # U x N
    col = np.exp(1j * np.pi * np.outer(tau2, i2))                  # V x N
    return ResponseSurface(grid_u, grid_v, np.abs(row @ col.T))


def find_peaks(surface: ResponseSurface, count: int = 2) -> list[tuple[float, float, float]]:
    """Largest local maxima (8-neighbourhood, plateaus allowed) as (u, v, value)."""
    z = surface.values
    pad = np.pad(z, 1, constant_values=-np.inf)
    core = pad[1:-1, 1:-1]
    is_max = np.ones_like(z, dtype=bool)
    for du in (-1, 0, 1):
        for dv in (-1, 0, 1):
            if du or dv:
                is_max &= core >= pad[1 + du:pad.shape[0] - 1 + du, 1 + dv:pad.shape[1] - 1 + dv]
    iu, iv = np.nonzero(is_max)
    order = np.argsort(-z[iu, iv], kind="stable")
    peaks, taken = [], []
    for idx in order:
        a, b = iu[idx], iv[idx]
        # skip plateau duplicates adjacent to an already reported peak
        if any(abs(a - p) <= 1 and abs(b - q) <= 1 for p, q in taken):
            continue
        taken.append((a, b))
        peaks.append((float(surface.grid_u[a]), float(surface.grid_v[b]), float(z[a, b])))
        if len(peaks) == count:
            break
    return peaks


def peaks_match_targets(peaks, targets, tolerance: float) -> bool:
    """True when every target has a distinct peak within ``tolerance`` in both coordinates."""
    targets = [tuple(t) for t in targets]
    if len(peaks) < len(targets):
        return False
    for perm in permutations(range(len(peaks)), len(targets)):
        if all(abs(peaks[p][0] - t[0]) <= tolerance + 1e-12 and abs(peaks[p][1] - t[1]) <= tolerance + 1e-12
               for p, t in zip(perm, targets)):
            return True
    return False


def user_directions(geometry: Geometry) -> tuple[tuple[float, float], list[tuple[float, float]]]:
    """(incidence direction, per-user directions) seen from the IRS."""
    ang = angles_from_geometry(geometry)
    users = [(float(u), float(v)) for u, v in zip(ang.user_sin_az_cos_el, ang.user_sin_el)]
    return (ang.irs_sin_az_cos_el, ang.irs_sin_el), users


def trained_response(ckpt: Checkpoint, fading: FadingConfig, p_t: float, root_seed: int = 0,
                     grid_points: int = 101):
    """Response of the phases a checkpoint picks for one realization of the fixed geometry.

    Returns (surface, peaks, user directions); ``peaks`` holds one entry per user.
    """
    spec = ckpt.spec
    geometry = fixed_geometry(spec.num_users)
    fading = replace(fading, num_antennas=spec.num_antennas, num_elements=spec.num_elements)
    real = sample_channels(fading, geometry, derive_seed(root_seed, 0, 300))
    y = synthesize_pilots(real, default_pilots(spec.num_antennas, p_t), derive_seed(root_seed, 0, 301))
    phi = infer(ckpt, y[None], p_t)[0].phi
    incidence, users = user_directions(geometry)
    grid = make_grid(grid_points)
    surface = array_response(phi, incidence, grid, grid)
    return surface, find_peaks(surface, len(users)), users


def write_csv(path, surface: ResponseSurface) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(COLUMNS)
        for a, u in enumerate(surface.grid_u):
            for b, v in enumerate(surface.grid_v):
                out.writerow([f"{u:.6f}", f"{v:.6f}", f"{surface.values[a, b]:.12g}"])
