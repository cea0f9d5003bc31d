"""Parameter aggregation shared by every tier (groups, clients, sub-servers)."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch


class WeightMode(str, Enum):
    """How deviation from the size-weighted mean turns into a weight.

    ``literal``: weight proportional to the deviation.
    ``inverse``: weight proportional to 1 / deviation, so outliers count less.
    """

    LITERAL = "literal"
    INVERSE = "inverse"


@dataclass(frozen=True, eq=False)
class WeightedEntry:
    params: np.ndarray
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")


def _stack(entries: Sequence[WeightedEntry]) -> tuple[np.ndarray, np.ndarray]:
    if len(entries) == 0:
        raise ValueError("need at least one entry")
    sizes = {np.shape(e.params) for e in entries}
    if len(sizes) != 1 or len(next(iter(sizes))) != 1:
        raise DimensionMismatch(f"parameter shapes differ: {sorted(sizes)}")
    P = np.stack([np.asarray(e.params, dtype=np.float64) for e in entries])
    counts = np.array([e.count for e in entries], dtype=np.float64)
    return P, counts


def size_weighted_mean(entries: Sequence[WeightedEntry]) -> np.ndarray:
    P, counts = _stack(entries)
    return _combine(P, counts / counts.sum())


def deviation_weights(entries: Sequence[WeightedEntry], mode: WeightMode | str) -> np.ndarray:
    mode = WeightMode(mode)
    P, counts = _stack(entries)
    center = _combine(P, counts / counts.sum())
    d = np.linalg.norm(P - center, axis=1)
    total = d.sum()
    if total < 1e-12:
        return counts / counts.sum()
    if mode is WeightMode.LITERAL:
        return d / total
    # floor at eps guards exact zeros without perturbing ordinary deviations
    eps = 1e-8 * (1.0 + total / len(d))
    inv = 1.0 / np.maximum(d, eps)
    return inv / inv.sum()


def _combine(P: np.ndarray, weights: np.ndarray) -> np.ndarray:
    if np.all(P == P[0]):
        return P[0].copy()
    # rounding in the weighted sum can step a hair outside the inputs' range
    return np.clip(weights @ P, P.min(axis=0), P.max(axis=0))


def aggregate(entries: Sequence[WeightedEntry], mode: WeightMode | str) -> np.ndarray:
    """Deviation-weighted combination of the entries' parameters."""
    P, _ = _stack(entries)
    return _combine(P, deviation_weights(entries, mode))


def aggregate_plain(entries: Sequence[WeightedEntry]) -> np.ndarray:
    """Sample-count-weighted mean (the FedAvg rule)."""
    return size_weighted_mean(entries)
