"""Synthetic FDIA data, label-skew partitioning, standardization and CSV I/O.

Every function here is a pure function of its arguments; randomness only
enters through explicit integer seeds.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    ConstantFeature,
    InsufficientSamples,
    MissingLabelColumn,
    ParseError,
)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``X`` (n x F, float64) with binary labels ``y``."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ValueError("X must be a 2-D array with at least one feature")
        if X.shape[0] < 1:
            raise ValueError("a dataset needs at least one sample")
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one label per row of X")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    @property
    def attack_fraction(self) -> float:
        return float(self.y.mean())

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)

    __hash__ = None


@dataclass(frozen=True)
class ClientShard:
    client_id: int
    data: Dataset


@dataclass(frozen=True, eq=False)
class ScalerStats:
    mean: np.ndarray
    var: np.ndarray

    def apply(self, data: Dataset) -> Dataset:
        return Dataset((data.X - self.mean) / np.sqrt(self.var), data.y)


@dataclass(frozen=True)
class SynthConfig:
    feature_dim: int = 13
    n_train: int = 60000
    n_test: int = 10000
    attack_ratio: float = 0.2
    attack_shift: float = 1.0
    attacked_feature_count: int = 4
    noise_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.feature_dim < 1:
            raise ConfigError("feature_dim must be >= 1")
        if self.n_train < 1 or self.n_test < 1:
            raise ConfigError("n_train and n_test must be >= 1")
        if not 0.0 < self.attack_ratio < 1.0:
            raise ConfigError("attack_ratio must lie in the open interval (0, 1)")
        if not self.attack_shift > 0:
            raise ConfigError("attack_shift must be > 0")
        if not 1 <= self.attacked_feature_count <= self.feature_dim:
            raise ConfigError("attacked_feature_count must lie in [1, feature_dim]")
        if not self.noise_std > 0:
            raise ConfigError("noise_std must be > 0")


def generate_synthetic(config: SynthConfig) -> tuple[Dataset, Dataset]:
    """Draw seeded train/test splits.

    Normal rows are Gaussian around per-feature base means; attack rows get
    ``attack_shift`` added on one seeded subset of features shared by the
    whole dataset. Each split carries exactly ``round(n * attack_ratio)``
    attack rows.
    """
    rng = np.random.default_rng(config.seed)
    F = config.feature_dim
    base_mean = rng.normal(0.0, 1.0, size=F)
    attacked = np.sort(rng.choice(F, size=config.attacked_feature_count, replace=False))

    def draw(n: int) -> Dataset:
        X = base_mean + config.noise_std * rng.standard_normal((n, F))
        n_attack = int(round(n * config.attack_ratio))
        y = np.zeros(n, dtype=np.int64)
        y[:n_attack] = 1
        y = rng.permutation(y)
        rows = np.flatnonzero(y)
        X[np.ix_(rows, attacked)] += config.attack_shift
        return Dataset(X, y)

    return draw(config.n_train), draw(config.n_test)


def _apportion(weights: np.ndarray, total: int, caps: np.ndarray) -> np.ndarray:
    """Integer counts proportional to ``weights``, summing to ``total``, each <= cap."""
    weights = np.asarray(weights, dtype=np.float64).copy()
    caps = np.asarray(caps, dtype=np.int64)
    if total > caps.sum():
        raise InsufficientSamples(f"cannot place {total} samples into capacity {caps.sum()}")
    counts = np.zeros(len(weights), dtype=np.int64)
    free = np.ones(len(weights), dtype=bool)
    remaining = total
    # clip clients whose proportional share exceeds their capacity, then re-spread
    while True:
        w = np.where(free, weights, 0.0)
        if w.sum() <= 0:
            w = np.where(free, 1.0, 0.0)
        share = remaining * w / w.sum()
        over = free & (share > caps)
        if not over.any():
            break
        counts[over] = caps[over]
        remaining -= int(caps[over].sum())
        free &= ~over
    base = np.floor(share).astype(np.int64)
    base[~free] = 0
    counts[free] = base[free]
    left = remaining - int(base[free].sum())
    frac = np.where(free & (counts < caps), share - base, -1.0)
    # stable order: largest remainder first, lowest index on ties
    order = np.lexsort((np.arange(len(frac)), -frac))
    i = 0
    while left > 0:
        j = order[i % len(order)]
        if free[j] and counts[j] < caps[j]:
            counts[j] += 1
            left -= 1
        i += 1
    return counts


def partition_label_skew(train: Dataset, k: int, skew: float, seed: int) -> list[ClientShard]:
    """Split ``train`` into ``k`` disjoint shards with dispersed attack fractions.

    Each client's target attack fraction is ``a*(1-skew) + skew*v`` with
    ``v ~ Beta(2a, 2(1-a))`` (mean ``a``), where ``a`` is the global attack
    fraction. Shard sizes are ``n // k`` or one more. Targets are rescaled so
    the attack total matches the input exactly.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 <= skew <= 1.0:
        raise ValueError("skew must lie in [0, 1]")
    n = train.n
    if n < k:
        raise InsufficientSamples(f"{n} samples cannot fill {k} shards")
    attack_idx = np.flatnonzero(train.y == 1)
    normal_idx = np.flatnonzero(train.y == 0)
    if skew < 1.0 and (len(attack_idx) < k or len(normal_idx) < k):
        raise InsufficientSamples("each class needs at least k samples when skew < 1")

    rng = np.random.default_rng(seed)
    a = len(attack_idx) / n
    sizes = np.full(k, n // k, dtype=np.int64)
    sizes[: n % k] += 1
    if 0.0 < a < 1.0:
        v = rng.beta(2.0 * a, 2.0 * (1.0 - a), size=k)
    else:
        v = np.full(k, a)
    p = a * (1.0 - skew) + skew * v
    attacks = _apportion(p * sizes, len(attack_idx), sizes)
    normals = sizes - attacks

    attack_perm = rng.permutation(attack_idx)
    normal_perm = rng.permutation(normal_idx)
    a_cut = np.concatenate([[0], np.cumsum(attacks)])
    n_cut = np.concatenate([[0], np.cumsum(normals)])
    shards = []
    for cid in range(k):
        idx = np.concatenate(
            [attack_perm[a_cut[cid] : a_cut[cid + 1]], normal_perm[n_cut[cid] : n_cut[cid + 1]]]
        )
        shards.append(ClientShard(cid, train.subset(np.sort(idx))))
    return shards


def replicate_shards(train: Dataset, k: int) -> list[ClientShard]:
    """Give every client an identical copy of the first ``n // k`` rows (diagnostic mode)."""
    if train.n < k:
        raise InsufficientSamples(f"{train.n} samples cannot fill {k} shards")
    block = train.subset(np.arange(train.n // k))
    return [ClientShard(cid, block) for cid in range(k)]


def fit_scaler(data: Dataset) -> ScalerStats:
    if data.n < 2:
        raise ConstantFeature(0)
    mean = data.X.mean(axis=0)
    var = data.X.var(axis=0, ddof=1)
    for i, s in enumerate(var):
        if not s > 0:
            raise ConstantFeature(i)
    return ScalerStats(mean, var)


def standardize(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset, ScalerStats]:
    """Z-score both splits with the training split's mean and sample variance."""
    stats = fit_scaler(train)
    return stats.apply(train), stats.apply(test), stats


def standardize_shards(shards: Sequence[ClientShard]) -> list[ClientShard]:
    """Per-client scaling; each shard uses only its own statistics."""
    return [ClientShard(s.client_id, fit_scaler(s.data).apply(s.data)) for s in shards]


def split_train_test(data: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then the first ``n - round(n*f)`` rows train, the rest test."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    n = data.n
    if n < 2:
        raise InsufficientSamples("need at least two samples to split")
    n_test = min(n - 1, max(1, int(math.floor(n * test_fraction + 0.5))))
    perm = np.random.default_rng(seed).permutation(n)
    return data.subset(perm[: n - n_test]), data.subset(perm[n - n_test :])


def load_csv(path) -> Dataset:
    """Read a header-plus-rows CSV whose ``label`` column holds 0/1."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(1, "", "empty file") from None
        if "label" not in header:
            raise MissingLabelColumn(f"{path}: no 'label' column in header")
        li = header.index("label")
        feature_cols = [i for i in range(len(header)) if i != li]
        if not feature_cols:
            raise ParseError(1, "", "no feature columns")
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(lineno, "", f"expected {len(header)} cells, got {len(row)}")
            feats = []
            for i in feature_cols:
                try:
                    val = float(row[i])
                except ValueError:
                    raise ParseError(lineno, header[i], f"not a number: {row[i]!r}") from None
                if not math.isfinite(val):
                    raise ParseError(lineno, header[i], "non-finite value")
                feats.append(val)
            cell = row[li].strip()
            if cell not in ("0", "1"):
                raise ParseError(lineno, "label", f"label must be 0 or 1, got {cell!r}")
            rows.append(feats)
            labels.append(int(cell))
    if not rows:
        raise ParseError(2, "", "no data rows")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64))


def write_csv(data: Dataset, path) -> None:
    """Write ``f1..fF,label``; floats use ``repr`` so a reload is bit-exact."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i + 1}" for i in range(data.feature_dim)] + ["label"])
        for xi, yi in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in xi] + [int(yi)])
