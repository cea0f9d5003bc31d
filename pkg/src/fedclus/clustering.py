"""Farthest-point sub-client clustering with an acceptance gate.

Centers are admitted greedily: the sample whose distance to its nearest
existing center is largest becomes the next center, as long as that
distance exceeds ``theta`` times the distance between the first two
centers and the center budget ``max(2, n // max_centers_divisor)`` is not
exhausted. Samples then join their nearest center.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .datagen import ClientShard
from .errors import ConfigError

# exact mean pairwise distance up to this many points, seeded subsample beyond
PAIRWISE_EXACT_LIMIT = 2000


@dataclass(frozen=True)
class ClusterParams:
    theta: float = 0.5
    min_samples_to_cluster: int = 300
    max_centers_divisor: int = 50
    gate_factor: float = 1.2
    subsample_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ConfigError("theta must lie in (0, 1)")
        if self.min_samples_to_cluster < 2:
            raise ConfigError("min_samples_to_cluster must be >= 2")
        if self.max_centers_divisor < 1:
            raise ConfigError("max_centers_divisor must be >= 1")
        if not self.gate_factor > 0:
            raise ConfigError("gate_factor must be > 0")


@dataclass(frozen=True, eq=False)
class ClusterSet:
    centers: np.ndarray  # (m, F)
    groups: tuple  # tuple of int64 index arrays into the shard
    source_size: int

    @property
    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def __len__(self):
        return len(self.groups)

    @classmethod
    def single(cls, samples: np.ndarray) -> "ClusterSet":
        samples = np.asarray(samples, dtype=np.float64)
        return cls(samples[:1].copy(), (np.arange(len(samples)),), len(samples))


def center_budget(n: int, params: ClusterParams) -> int:
    return max(2, n // params.max_centers_divisor)


def select_centers(samples, params: ClusterParams, return_indices: bool = False):
    """Return the center vectors (and optionally their row indices).

    Ties in every argmax resolve to the lowest row index.
    """
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if n == 0:
        raise ValueError("select_centers needs at least one sample")
    chosen = [0]
    mind = np.linalg.norm(X - X[0], axis=1)
    z2 = int(np.argmax(mind))
    d12 = float(mind[z2])
    if d12 > 0.0:
        chosen.append(z2)
        mind = np.minimum(mind, np.linalg.norm(X - X[z2], axis=1))
        budget = center_budget(n, params)
        while len(chosen) < budget:
            s = int(np.argmax(mind))
            if not mind[s] > params.theta * d12:
                break
            chosen.append(s)
            mind = np.minimum(mind, np.linalg.norm(X - X[s], axis=1))
    idx = np.array(chosen, dtype=np.int64)
    if return_indices:
        return X[idx], idx
    return X[idx]


def _distances_to(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return np.linalg.norm(X[:, None, :] - centers[None, :, :], axis=2)


def assign_nearest(samples, centers) -> ClusterSet:
    """Nearest-center assignment by Euclidean distance; ties go to the lower center index."""
    X = np.asarray(samples, dtype=np.float64)
    C = np.asarray(centers, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if C.ndim == 1:
        C = C[:, None]
    if len(C) == 0:
        raise ValueError("need at least one center")
    if X.shape[1] != C.shape[1]:
        raise ValueError("sample and center dimensions differ")
    label = np.empty(len(X), dtype=np.int64)
    # chunked to bound the (n, m, F) temporary
    for start in range(0, len(X), 4096):
        label[start : start + 4096] = np.argmin(_distances_to(X[start : start + 4096], C), axis=1)
    groups = tuple(np.flatnonzero(label == j) for j in range(len(C)))
    return ClusterSet(C.copy(), groups, len(X))


def mean_pairwise_distance(X: np.ndarray, seed: int = 0) -> float:
    """Mean Euclidean distance over unordered pairs; 0 for fewer than two points."""
    if len(X) < 2:
        return 0.0
    if len(X) > PAIRWISE_EXACT_LIMIT:
        rng = np.random.default_rng(seed)
        X = X[np.sort(rng.choice(len(X), PAIRWISE_EXACT_LIMIT, replace=False))]
    return float(pdist(X).mean())


def gate_quantities(X: np.ndarray, cs: ClusterSet, seed: int = 0) -> tuple[float, float]:
    """(max over groups of mean intra-group distance, mean distance over the whole shard)."""
    worst = max(mean_pairwise_distance(X[g], seed) for g in cs.groups)
    return worst, mean_pairwise_distance(X, seed)


def cluster_samples(X: np.ndarray, params: ClusterParams) -> ClusterSet:
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        raise ValueError("cannot cluster an empty shard")
    if len(X) <= params.min_samples_to_cluster:
        return ClusterSet.single(X)
    cs = assign_nearest(X, select_centers(X, params))
    if len(cs) == 1:
        return cs
    worst, whole = gate_quantities(X, cs, params.subsample_seed)
    if worst < params.gate_factor * whole:
        return cs
    return ClusterSet.single(X)


def cluster_client(shard: ClientShard, params: ClusterParams) -> ClusterSet:
    """Cluster a client's shard, or return one group when it is small or the gate rejects."""
    return cluster_samples(shard.data.X, params)
