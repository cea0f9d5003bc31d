"""Local detector: logistic regression or a one-hidden-layer tanh MLP.

Parameters travel as one flat float64 vector:

* logistic: ``[w (F), b]``
* mlp:      ``[W1 (F*H, row-major F x H), b1 (H), W2 (H), b2]``

The architecture is recoverable from the vector length and the feature
count, so the prediction and loss functions only take ``(params, X, y)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .errors import ConfigError, DimensionMismatch

PROB_CLAMP = 1e-12


@dataclass(frozen=True)
class Architecture:
    kind: str = "logistic"
    hidden: int = 8

    def __post_init__(self):
        if self.kind not in ("logistic", "mlp"):
            raise ConfigError(f"unknown architecture {self.kind!r}")
        if self.kind == "mlp" and self.hidden < 1:
            raise ConfigError("hidden width must be >= 1")

    def n_params(self, feature_dim: int) -> int:
        if self.kind == "logistic":
            return feature_dim + 1
        return self.hidden * (feature_dim + 2) + 1


LOGISTIC = Architecture("logistic")


def mlp(hidden: int = 8) -> Architecture:
    return Architecture("mlp", hidden)


@dataclass(frozen=True)
class TrainSpec:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not self.learning_rate >= 0:
            raise ConfigError("learning_rate must be >= 0")


def init_params(feature_dim: int, arch: Architecture = LOGISTIC, seed: int = 0) -> np.ndarray:
    """Zeros for logistic; seeded U(-0.1, 0.1) for the MLP so hidden units differ."""
    if feature_dim < 1:
        raise ValueError("feature_dim must be >= 1")
    size = arch.n_params(feature_dim)
    if arch.kind == "logistic":
        return np.zeros(size)
    return np.random.default_rng(seed).uniform(-0.1, 0.1, size=size)


def _hidden_width(params: np.ndarray, feature_dim: int) -> int:
    """0 for logistic layouts, H for MLP layouts."""
    size = len(params)
    if size == feature_dim + 1:
        return 0
    h, rem = divmod(size - 1, feature_dim + 2)
    if rem or h < 1:
        raise DimensionMismatch(f"{size} parameters do not fit {feature_dim} features")
    return h


def _unpack_mlp(params: np.ndarray, F: int, H: int):
    W1 = params[: F * H].reshape(F, H)
    b1 = params[F * H : F * H + H]
    W2 = params[F * H + H : F * H + 2 * H]
    b2 = params[-1]
    return W1, b1, W2, b2


def _sigmoid(z):
    # split by sign so exp never overflows
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _as_batch(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X[None, :] if X.ndim == 1 else X


def _mlp_forward(params, X, H):
    W1, b1, W2, b2 = _unpack_mlp(params, X.shape[1], H)
    hid = np.tanh(X @ W1 + b1)
    return hid, _sigmoid(hid @ W2 + b2)


def predict_proba(params: np.ndarray, X) -> np.ndarray | float:
    """Attack probability for one sample (returns float) or a batch (returns array)."""
    single = np.ndim(X) == 1
    X = _as_batch(X)
    params = np.asarray(params, dtype=np.float64)
    H = _hidden_width(params, X.shape[1])
    if H == 0:
        p = _sigmoid(X @ params[:-1] + params[-1])
    else:
        p = _mlp_forward(params, X, H)[1]
    return float(p[0]) if single else p


def loss(params: np.ndarray, X, y) -> float:
    """Mean binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12]."""
    X = _as_batch(X)
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if len(y) == 0:
        raise ValueError("loss needs a nonempty batch")
    p = np.clip(predict_proba(params, X), PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))


@numba.njit(cache=True, nogil=True)
def _sigmoid_scalar(z):
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


@numba.njit(cache=True, nogil=True)
def _logistic_grad(w, X, y, idx, g):
    F = X.shape[1]
    for j in range(F + 1):
        g[j] = 0.0
    for r in idx:
        z = w[F]
        for j in range(F):
            z += w[j] * X[r, j]
        d = _sigmoid_scalar(z) - y[r]
        for j in range(F):
            g[j] += d * X[r, j]
        g[F] += d
    inv = 1.0 / len(idx)
    for j in range(F + 1):
        g[j] *= inv


@numba.njit(cache=True, nogil=True)
def _logistic_sgd(w, X, y, perms, batch_size, lr):
    n = perms.shape[1]
    g = np.empty_like(w)
    for e in range(perms.shape[0]):
        for start in range(0, n, batch_size):
            # sorted batch => canonical summation order, so B = n reproduces full-batch GD
            idx = np.sort(perms[e, start : start + batch_size])
            _logistic_grad(w, X, y, idx, g)
            for j in range(len(w)):
                w[j] -= lr * g[j]


def _mlp_grad(params, X, y, H):
    n = len(y)
    W1, b1, W2, b2 = _unpack_mlp(params, X.shape[1], H)
    hid, p = _mlp_forward(params, X, H)
    d = (p - y) / n
    g_W2 = hid.T @ d
    g_b2 = d.sum()
    d_hid = np.outer(d, W2) * (1.0 - hid * hid)
    g_W1 = X.T @ d_hid
    g_b1 = d_hid.sum(axis=0)
    return np.concatenate([g_W1.ravel(), g_b1, g_W2, [g_b2]])


def gradient(params: np.ndarray, X, y) -> np.ndarray:
    """Analytic gradient of the unclamped mean cross-entropy."""
    X = _as_batch(X)
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if len(y) == 0:
        raise ValueError("gradient needs a nonempty batch")
    params = np.asarray(params, dtype=np.float64)
    H = _hidden_width(params, X.shape[1])
    if H == 0:
        g = np.empty_like(params)
        _logistic_grad(params, np.ascontiguousarray(X), y, np.arange(len(y)), g)
        return g
    return _mlp_grad(params, X, y, H)


def epoch_permutations(n: int, epochs: int, seed: int | Sequence[int]) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.stack([rng.permutation(n) for _ in range(epochs)])


def local_train(start: np.ndarray, X, y, spec: TrainSpec, key: Sequence[int] = ()) -> np.ndarray:
    """Mini-batch gradient descent from ``start``; returns new parameters.

    Shuffle order is drawn from ``default_rng([spec.seed, *key])`` each epoch.
    The last batch of an epoch may be short; its gradient is the mean over
    the rows it actually has.
    """
    X = np.ascontiguousarray(_as_batch(X))
    y = np.ascontiguousarray(np.atleast_1d(np.asarray(y, dtype=np.float64)))
    if len(y) == 0:
        raise ValueError("local_train needs a nonempty group")
    w = np.array(start, dtype=np.float64)
    perms = epoch_permutations(len(y), spec.epochs, [spec.seed, *key])
    H = _hidden_width(w, X.shape[1])
    if H == 0:
        _logistic_sgd(w, X, y, perms, spec.batch_size, spec.learning_rate)
        return w
    for perm in perms:
        for s in range(0, len(y), spec.batch_size):
            idx = np.sort(perm[s : s + spec.batch_size])
            w = w - spec.learning_rate * _mlp_grad(w, X[idx], y[idx], H)
    return w
