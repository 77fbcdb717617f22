"""Seeded datasets of (pilot features, true channels) pairs.

Sample ``i`` of split ``s`` under root seed ``r`` draws from independent
Philox streams ``derive_seed(r, i, 8*s + j)``:
j=0 geometry, j=1 fading, j=2 pilot noise, j=3 random IRS phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelRealization, FadingConfig, PilotConfig, default_pilots, derive_seed, fixed_geometry, make_rng,
    random_geometry, sample_channels, synthesize_pilots,
)
from .secrecy import ChannelBatch

TRAIN, TEST, VALID = 0, 1, 2


@dataclass
class Dataset:
    channels: ChannelBatch
    pilots: np.ndarray     # B x K x S complex
    random_phi: np.ndarray  # B x N unit modulus, used by the random-IRS variant
    realizations: list

    def __len__(self) -> int:
        return len(self.channels)

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.channels.take(idx), self.pilots[idx], self.random_phi[idx],
                       [self.realizations[i] for i in idx])


def sample_index_seed(root: int, index: int, split: int, stream: int) -> int:
    return derive_seed(root, index, 8 * split + stream)


def draw_sample(fading: FadingConfig, pilots: PilotConfig, root: int, index: int, split: int = TRAIN,
                num_users: int = 2, geometry_mode: str = "random") -> tuple[ChannelRealization, np.ndarray, np.ndarray]:
    if geometry_mode == "random":
        geometry = random_geometry(make_rng(sample_index_seed(root, index, split, 0)), num_users)
    elif geometry_mode == "fixed":
        geometry = fixed_geometry(num_users)
    else:
        raise ValueError(f"unknown geometry mode {geometry_mode!r}")
    realization = sample_channels(fading, geometry, sample_index_seed(root, index, split, 1))
    y = synthesize_pilots(realization, pilots, sample_index_seed(root, index, split, 2))
    phase = make_rng(sample_index_seed(root, index, split, 3)).uniform(0.0, 2 * np.pi, fading.num_elements)
    return realization, y, np.exp(1j * phase)


def build_dataset(fading: FadingConfig, num_samples: int, root_seed: int, split: int = TRAIN,
                  num_users: int = 2, geometry_mode: str = "random", pilots: PilotConfig | None = None,
                  p_t: float = 1.0) -> Dataset:
    pilots = pilots or default_pilots(fading.num_antennas, pilot_power=p_t)
    rs, ys, phis = [], [], []
    for i in range(num_samples):
        r, y, phi = draw_sample(fading, pilots, root_seed, i, split, num_users, geometry_mode)
        rs.append(r)
        ys.append(y)
        phis.append(phi)
    return Dataset(ChannelBatch.stack(rs), np.stack(ys), np.stack(phis), rs)
