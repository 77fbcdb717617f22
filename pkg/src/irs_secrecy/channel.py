"""Geometry, path loss, Rician/Rayleigh fading and pilot observations.

Channel conventions follow the downlink model used throughout the package:

* ``h_direct[k]``     BS -> user k, length M, Rayleigh scaled by the direct path loss
* ``g``               BS -> IRS, M x N, Rician with a rank-one LOS part
* ``h_irs_user[k]``   IRS -> user k, length N, Rician
* ``h_eve_*``         the same two links towards the external eavesdropper

The combined channel seen by a receiver is ``h_d + g @ (phi * h_r)`` and the
received amplitude for beam ``w`` is ``combined @ w`` (plain transpose).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

BS_POSITION = (0.0, 0.0, 0.0)
IRS_BOX = ((20.0, 30.0), (20.0, 30.0), (0.0, 0.0))
USER_BOX = ((30.0, 50.0), (30.0, 50.0), (-10.0, -10.0))
EVE_BOX = ((50.0, 100.0), (30.0, 50.0), (-20.0, -20.0))

# geometry used for the array-response experiment
FIXED_IRS = (20.0, 30.0, 0.0)
FIXED_USERS = ((40.0, 40.0, -10.0), (40.0, 45.0, -10.0))
FIXED_EVE = (75.0, 40.0, -20.0)

PATHLOSS_DIRECT = (32.6, 36.7)
PATHLOSS_IRS = (30.0, 22.0)

IRS_ROW = 10


class GeometryError(ValueError):
    pass


def dbm_to_watt(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def path_loss_db(distance: float, model: str = "direct") -> float:
    if not distance > 0:
        raise GeometryError(f"path loss needs a positive distance, got {distance}")
    intercept, slope = {"direct": PATHLOSS_DIRECT, "irs_hop": PATHLOSS_IRS}[model]
    return intercept + slope * math.log10(distance)


def path_loss_linear(distance: float, model: str = "direct") -> float:
    """Amplitude factor 10^(-L/20) that multiplies channel entries."""
    return 10.0 ** (-path_loss_db(distance, model) / 20.0)


@dataclass
class Geometry:
    bs_position: np.ndarray
    irs_position: np.ndarray
    user_positions: np.ndarray  # K x 3
    eve_position: np.ndarray | None = None
    internal_eve_index: int | None = None

    def __post_init__(self):
        self.bs_position = np.asarray(self.bs_position, dtype=float)
        self.irs_position = np.asarray(self.irs_position, dtype=float)
        self.user_positions = np.atleast_2d(np.asarray(self.user_positions, dtype=float))
        if self.eve_position is not None:
            self.eve_position = np.asarray(self.eve_position, dtype=float)

    @property
    def num_users(self) -> int:
        return self.user_positions.shape[0]

    def validate(self) -> None:
        if self.num_users < 1:
            raise GeometryError("at least one user is required")
        if self.internal_eve_index is not None and not 0 <= self.internal_eve_index < self.num_users:
            raise GeometryError(f"internal eavesdropper index {self.internal_eve_index} out of range")
        points = [self.bs_position, self.irs_position, *self.user_positions]
        if self.eve_position is not None:
            points.append(self.eve_position)
        for a in points[2:]:
            for b in (self.bs_position, self.irs_position):
                if np.linalg.norm(a - b) <= 0:
                    raise GeometryError("coincident positions give a zero link distance")
        if np.linalg.norm(self.irs_position - self.bs_position) <= 0:
            raise GeometryError("BS and IRS coincide")


def fixed_geometry(num_users: int = 2, internal_eve_index: int | None = None) -> Geometry:
    users = np.array(FIXED_USERS[:num_users])
    if num_users > len(FIXED_USERS):
        extra = [(40.0, 40.0 + 5.0 * i, -10.0) for i in range(len(FIXED_USERS), num_users)]
        users = np.vstack([users, extra])
    return Geometry(np.array(BS_POSITION), np.array(FIXED_IRS), users, np.array(FIXED_EVE), internal_eve_index)


def _uniform_in(rng: np.random.Generator, box, count: int | None = None) -> np.ndarray:
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    size = 3 if count is None else (count, 3)
    return lo + (hi - lo) * rng.random(size)


def random_geometry(rng: np.random.Generator, num_users: int, internal_eve_index: int | None = None) -> Geometry:
    """Positions drawn uniformly from the simulation coordinate boxes."""
    irs = _uniform_in(rng, IRS_BOX)
    users = _uniform_in(rng, USER_BOX, num_users)
    eve = _uniform_in(rng, EVE_BOX)
    return Geometry(np.array(BS_POSITION), irs, users, eve, internal_eve_index)


@dataclass
class AngleSet:
    """Direction cosines of every LOS link (sin/cos products, never raw angles)."""

    bs_cos_az_cos_el: float          # cos(phi0)cos(theta0), BS side of BS-IRS
    irs_sin_az_cos_el: float         # sin(phi1)cos(theta1), IRS departure towards BS
    irs_sin_el: float                # sin(theta1)
    user_sin_az_cos_el: np.ndarray   # sin(phi2k)cos(theta2k) per user
    user_sin_el: np.ndarray          # sin(theta2k) per user
    eve_sin_az_cos_el: float | None = None
    eve_sin_el: float | None = None


def _irs_direction(irs: np.ndarray, point: np.ndarray) -> tuple[float, float]:
    d = np.linalg.norm(point - irs)
    if d <= 0:
        raise GeometryError("receiver coincides with the IRS")
    return (point[1] - irs[1]) / d, (point[2] - irs[2]) / d


def angles_from_geometry(geometry: Geometry) -> AngleSet:
    geometry.validate()
    bs, irs = geometry.bs_position, geometry.irs_position
    d_bi = np.linalg.norm(irs - bs)
    if d_bi <= 0:
        raise GeometryError("BS and IRS coincide")
    users = [_irs_direction(irs, u) for u in geometry.user_positions]
    eve = _irs_direction(irs, geometry.eve_position) if geometry.eve_position is not None else (None, None)
    return AngleSet(
        bs_cos_az_cos_el=(irs[0] - bs[0]) / d_bi,
        irs_sin_az_cos_el=(bs[1] - irs[1]) / d_bi,
        irs_sin_el=(bs[2] - irs[2]) / d_bi,
        user_sin_az_cos_el=np.array([u[0] for u in users]),
        user_sin_el=np.array([u[1] for u in users]),
        eve_sin_az_cos_el=eve[0],
        eve_sin_el=eve[1],
    )


def irs_indices(n_elements: int) -> tuple[np.ndarray, np.ndarray]:
    """Column/row index of each element on a 10-wide planar IRS."""
    n = np.arange(n_elements)
    return n % IRS_ROW, n // IRS_ROW


def steering_irs(sin_az_cos_el: float, sin_el: float, n_elements: int) -> np.ndarray:
    i1, i2 = irs_indices(n_elements)
    return np.exp(1j * np.pi * (i1 * sin_az_cos_el + i2 * sin_el))


def steering_bs(cos_az_cos_el: float, n_antennas: int) -> np.ndarray:
    return np.exp(1j * np.arange(n_antennas) * cos_az_cos_el)


@dataclass
class FadingConfig:
    num_antennas: int = 4
    num_elements: int = 16
    rician_k: float = 10.0
    noise_power: float = 1e-13
    pathloss_direct: tuple = PATHLOSS_DIRECT
    pathloss_irs: tuple = PATHLOSS_IRS

    def validate(self) -> None:
        if self.rician_k < 0:
            raise ValueError("Rician factor must be nonnegative")
        if not self.noise_power > 0:
            raise ValueError("noise power must be positive")
        if self.num_antennas < 1 or self.num_elements < 1:
            raise ValueError("need at least one antenna and one IRS element")


@dataclass
class ChannelRealization:
    g: np.ndarray            # M x N
    h_direct: np.ndarray     # K x M
    h_irs_user: np.ndarray   # K x N
    h_eve_direct: np.ndarray  # M
    h_eve_irs: np.ndarray     # N
    geometry: Geometry
    seed: int
    noise_power: float = 1e-13

    @property
    def dims(self) -> tuple[int, int, int]:
        """(M, N, K)."""
        return self.g.shape[0], self.g.shape[1], self.h_direct.shape[0]

    def combined_user_channels(self, phi: np.ndarray) -> np.ndarray:
        """K x M matrix of h_d,k + G diag(phi) h_r,k."""
        return self.h_direct + (self.h_irs_user * phi) @ self.g.T

    def combined_eve_channel(self, phi: np.ndarray) -> np.ndarray:
        return self.h_eve_direct + self.g @ (phi * self.h_eve_irs)


def _level(value: float, model: tuple) -> float:
    return 10.0 ** (-(model[0] + model[1] * math.log10(value)) / 20.0)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``seed`` (up to 128 bits)."""
    return np.random.Generator(np.random.Philox(key=int(seed)))


def derive_seed(root: int, index: int, stream: int = 0) -> int:
    """Pack (root, sample index, stream) into one Philox key.

    root occupies the low 64 bits, index the next 32, stream the top 32, so
    distinct triples never share a key.
    """
    if not (0 <= root < 2 ** 64 and 0 <= index < 2 ** 32 and 0 <= stream < 2 ** 32):
        raise ValueError("seed components out of range")
    return root | (index << 64) | (stream << 96)


def _cn(rng: np.random.Generator, size) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def _rician_weights(kappa: float) -> tuple[float, float]:
    if math.isinf(kappa):
        return 1.0, 0.0
    return math.sqrt(kappa / (1.0 + kappa)), math.sqrt(1.0 / (1.0 + kappa))


def sample_channels(config: FadingConfig, geometry: Geometry, rng_seed: int) -> ChannelRealization:
    config.validate()
    angles = angles_from_geometry(geometry)
    rng = make_rng(rng_seed)
    M, N, K = config.num_antennas, config.num_elements, geometry.num_users
    bs, irs = geometry.bs_position, geometry.irs_position
    w_los, w_nlos = _rician_weights(config.rician_k)

    d_direct = np.linalg.norm(geometry.user_positions - bs, axis=1)
    beta0 = np.array([_level(d, config.pathloss_direct) for d in d_direct])
    h_direct = beta0[:, None] * _cn(rng, (K, M))

    beta1 = _level(np.linalg.norm(irs - bs), config.pathloss_irs)
    g_los = np.outer(steering_bs(angles.bs_cos_az_cos_el, M),
                     np.conj(steering_irs(angles.irs_sin_az_cos_el, angles.irs_sin_el, N)))
    g = beta1 * (w_los * g_los + w_nlos * _cn(rng, (M, N)))

    d_iu = np.linalg.norm(geometry.user_positions - irs, axis=1)
    beta2 = np.array([_level(d, config.pathloss_irs) for d in d_iu])
    h_los = np.stack([steering_irs(u, v, N) for u, v in zip(angles.user_sin_az_cos_el, angles.user_sin_el)])
    h_irs_user = beta2[:, None] * (w_los * h_los + w_nlos * _cn(rng, (K, N)))

    if geometry.eve_position is not None:
        eve = geometry.eve_position
        h_eve_direct = _level(np.linalg.norm(eve - bs), config.pathloss_direct) * _cn(rng, M)
        eve_los = steering_irs(angles.eve_sin_az_cos_el, angles.eve_sin_el, N)
        h_eve_irs = _level(np.linalg.norm(eve - irs), config.pathloss_irs) * (w_los * eve_los + w_nlos * _cn(rng, N))
    else:
        h_eve_direct = np.zeros(M, dtype=complex)
        h_eve_irs = np.zeros(N, dtype=complex)

    return ChannelRealization(g, h_direct, h_irs_user, h_eve_direct, h_eve_irs, geometry, rng_seed,
                              config.noise_power)


# --- pilot observations -----------------------------------------------------

@dataclass
class PilotConfig:
    snapshot_count: int
    pilot_power: float = 1.0
    noise_on: bool = True
    include_eve: bool = False

    def validate(self) -> None:
        if self.snapshot_count < 1:
            raise ValueError("need at least one pilot snapshot")

    def beam(self, s: int, num_antennas: int) -> np.ndarray:
        e = np.zeros(num_antennas, dtype=complex)
        e[s % num_antennas] = 1.0
        return e

    def irs_pattern(self, s: int, num_elements: int) -> np.ndarray:
        n = np.arange(num_elements)
        return np.exp(-2j * np.pi * n * (s % num_elements) / num_elements)


def default_pilots(num_antennas: int, pilot_power: float = 1.0, noise_on: bool = True) -> PilotConfig:
    return PilotConfig(4 * num_antennas, pilot_power, noise_on)


def synthesize_pilots(realization: ChannelRealization, pilots: PilotConfig, rng_seed: int):
    """Received pilot samples, K x S (and an S-vector for the eavesdropper if requested)."""
    pilots.validate()
    M, N, K = realization.dims
    S = pilots.snapshot_count
    amp = math.sqrt(pilots.pilot_power)
    y = np.empty((K, S), dtype=complex)
    y_eve = np.empty(S, dtype=complex)
    for s in range(S):
        beam = pilots.beam(s, M) * amp
        pattern = pilots.irs_pattern(s, N)
        y[:, s] = realization.combined_user_channels(pattern) @ beam
        y_eve[s] = realization.combined_eve_channel(pattern) @ beam
    if pilots.noise_on:
        rng = make_rng(rng_seed)
        sigma = math.sqrt(realization.noise_power)
        y = y + sigma * _cn(rng, (K, S))
        y_eve = y_eve + sigma * _cn(rng, S)
    if pilots.include_eve:
        return y, y_eve
    return y


# --- binary export ----------------------------------------------------------

DUMP_MAGIC = b"IRSCHAN\x00"
DUMP_VERSION = 1
_HEADER = struct.Struct("<8sIIIIIQQd")


def _complex_block(z: np.ndarray) -> bytes:
    z = np.ascontiguousarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1).astype("<f8").tobytes()


def save_realization(path, realization: ChannelRealization, pilots_y: np.ndarray | None = None) -> None:
    """Write a realization as little-endian float64 blocks.

    Layout: header ``<8s magic, u32 version, u32 M, N, K, S, u64 seed_lo, seed_hi, f64 noise>``
    followed by interleaved (re, im) float64 blocks g[M,N], h_direct[K,M], h_irs_user[K,N],
    h_eve_direct[M], h_eve_irs[N], then real float64 positions bs[3], irs[3], users[K,3],
    eve[3] (NaN when absent), then pilots Y[K,S] when S > 0.
    """
    M, N, K = realization.dims
    S = 0 if pilots_y is None else pilots_y.shape[1]
    seed = int(realization.seed)
    header = _HEADER.pack(DUMP_MAGIC, DUMP_VERSION, M, N, K, S, seed & (2 ** 64 - 1), seed >> 64,
                          realization.noise_power)
    geo = realization.geometry
    eve = geo.eve_position if geo.eve_position is not None else np.full(3, np.nan)
    positions = np.concatenate([geo.bs_position, geo.irs_position, geo.user_positions.ravel(), eve])
    with open(path, "wb") as fh:
        fh.write(header)
        for block in (realization.g, realization.h_direct, realization.h_irs_user,
                      realization.h_eve_direct, realization.h_eve_irs):
            fh.write(_complex_block(block))
        fh.write(positions.astype("<f8").tobytes())
        if S:
            fh.write(_complex_block(pilots_y))


def load_realization(path) -> tuple[ChannelRealization, np.ndarray | None]:
    raw = Path(path).read_bytes()
    magic, version, M, N, K, S, lo, hi, noise = _HEADER.unpack_from(raw, 0)
    if magic != DUMP_MAGIC or version != DUMP_VERSION:
        raise ValueError(f"{path}: not a realization dump (magic={magic!r}, version={version})")
    offset = _HEADER.size

    def take(count: int) -> np.ndarray:
        nonlocal offset
        out = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        offset += 8 * count
        return out

    def take_complex(shape) -> np.ndarray:
        n = int(np.prod(shape))
        pairs = take(2 * n).reshape(n, 2)
        return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(shape)

    g = take_complex((M, N))
    h_direct = take_complex((K, M))
    h_irs_user = take_complex((K, N))
    h_eve_direct = take_complex((M,))
    h_eve_irs = take_complex((N,))
    pos = take(9 + 3 * K)
    eve = pos[6 + 3 * K:]
    geometry = Geometry(pos[:3].copy(), pos[3:6].copy(), pos[6:6 + 3 * K].reshape(K, 3).copy(),
                        None if np.isnan(eve).any() else eve.copy())
    y = take_complex((K, S)) if S else None
    seed = lo | (hi << 64)
    return ChannelRealization(g, h_direct, h_irs_user, h_eve_direct, h_eve_irs, geometry, seed, noise), y


def superpose(a: ChannelRealization, b: ChannelRealization) -> ChannelRealization:
    """Sum the per-receiver links of two realizations that share the same BS-IRS matrix ``g``.

    Pilots are linear in (h_direct, h_irs_user) for a fixed ``g``; geometry and seed come from ``a``.
    """
    if not np.array_equal(a.g, b.g):
        raise ValueError("superposition is only defined for a common BS-IRS channel")
    return replace(a, h_direct=a.h_direct + b.h_direct, h_irs_user=a.h_irs_user + b.h_irs_user,
                   h_eve_direct=a.h_eve_direct + b.h_eve_direct, h_eve_irs=a.h_eve_irs + b.h_eve_irs)
