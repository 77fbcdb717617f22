"""Closed-form reference allocations used as sanity baselines."""

from __future__ import annotations

import numpy as np

from ..channel import ChannelRealization
from ..secrecy import ResourceAllocation


def matched_filter_allocation(realization: ChannelRealization, phi: np.ndarray, p_t: float) -> ResourceAllocation:
    """Per-user matched filter h_k*/|h_k| on the combined channel, equal powers, given phases."""
    M, N, K = realization.dims
    h = realization.combined_user_channels(phi)
    norms = np.linalg.norm(h, axis=1)
    cols = np.where(norms[:, None] > 0, np.conj(h) / np.where(norms > 0, norms, 1.0)[:, None],
                    np.eye(M, dtype=complex)[0])
    w = cols.T / np.sqrt(K)
    return ResourceAllocation(w, np.full(K, 1.0 / K), np.asarray(phi, dtype=complex), p_t)
