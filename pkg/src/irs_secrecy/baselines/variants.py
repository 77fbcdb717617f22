"""Degraded CO-GNN variants: one head replaced by a fixed rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cognn import TrainConfig, train
from ..dataset import Dataset
from ..secrecy import Scenario

KINDS = ("average_power", "random_irs", "omni_beam")


@dataclass
class GnnVariant:
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown variant {self.kind!r}; choose from {KINDS}")

    def frozen_value(self, num_antennas: int, num_users: int, phi_random: np.ndarray | None = None):
        """The fixed component: equal powers, the per-sample random phases, or the isotropic beam."""
        if self.kind == "average_power":
            return np.full(num_users, 1.0 / num_users)
        if self.kind == "random_irs":
            return phi_random
        return np.full((num_antennas, num_users), 1.0 / np.sqrt(num_antennas * num_users), dtype=complex)


def train_variant(kind: GnnVariant | str, data: Dataset, scenario: Scenario, config: TrainConfig, p_t: float,
                  holdout: Dataset | None = None, context: dict | None = None):
    kind = kind if isinstance(kind, GnnVariant) else GnnVariant(kind)
    return train(data, scenario, config, p_t, variant=kind.kind, holdout=holdout, context=context)
