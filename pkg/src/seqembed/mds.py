"""Stress-majorization multidimensional scaling over a precomputed
distance matrix.

Each update applies the closed-form majorization transform, so stress can
never increase; runs stop when the relative stress decrease falls below
``eps`` or after ``max_iter`` updates. Output coordinates are only defined
up to rotation and translation; compare embeddings by stress or distance
correlation, never coordinate-wise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .alignment import DistanceMatrix
from .autoencoder import Embedding
from .validation import check_features, check_square_distances


@dataclass(frozen=True)
class MdsConfig:
    target_dim: int = 3
    max_iter: int = 300
    eps: float = 1e-6
    rng_seed: int = 0

    def __post_init__(self):
        if self.target_dim < 1:
            raise ValueError(f"target_dim must be >= 1, got {self.target_dim}")
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


def _as_array(d_in: Union[DistanceMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(d_in, DistanceMatrix):
        if not d_in.symmetric:
            raise ValueError("MDS needs a symmetric distance matrix")
        return d_in.values.astype(np.float64)
    return check_square_distances(d_in, "d_in")


def stress(emb, d_in: Union[DistanceMatrix, np.ndarray]) -> float:
    """Raw stress: sum over unordered pairs of squared distance error.

    Zero exactly when the embedding reproduces every target distance.
    """
    coords = emb.coords if isinstance(emb, Embedding) else check_features(emb, "emb")
    target = _as_array(d_in)
    n = coords.shape[0]
    if target.shape != (n, n):
        raise ValueError(f"distance matrix shape {target.shape} does not match {n} points")
    diff = coords[:, None, :] - coords[None, :, :]
    embedded = np.sqrt((diff * diff).sum(axis=2))
    iu = np.triu_indices(n, k=1)
    err = target[iu] - embedded[iu]
    return float((err * err).sum())


def _pair_dists(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def smacof(
    d_in: Union[DistanceMatrix, np.ndarray],
    cfg: MdsConfig = MdsConfig(),
    ids: list[str] | None = None,
) -> tuple[Embedding, list[float]]:
    """Embed a distance matrix by iterated stress majorization.

    Starts from coordinates uniform in [-0.5, 0.5]^d seeded by
    ``cfg.rng_seed``. Returns the embedding and the stress history, whose
    first entry is the stress of the initial configuration; the history is
    non-increasing by construction. Coincident embedded points contribute
    zero to the transform rather than dividing by zero.
    """
    target = _as_array(d_in)
    n = target.shape[0]
    rng = np.random.default_rng(cfg.rng_seed)
    x = rng.uniform(-0.5, 0.5, size=(n, cfg.target_dim))

    def current_stress(coords: np.ndarray) -> float:
        embedded = _pair_dists(coords)
        iu = np.triu_indices(n, k=1)
        err = target[iu] - embedded[iu]
        return float((err * err).sum())

    history = [current_stress(x)]
    for _ in range(cfg.max_iter):
        embedded = _pair_dists(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            b = np.where(embedded > 0.0, -target / np.where(embedded > 0.0, embedded, 1.0), 0.0)
        np.fill_diagonal(b, 0.0)
        np.fill_diagonal(b, -b.sum(axis=1))
        x = (b @ x) / n
        history.append(current_stress(x))
        prev, curr = history[-2], history[-1]
        if prev > 0.0 and (prev - curr) / prev < cfg.eps:
            break
    if ids is None:
        ids = [str(i) for i in range(n)]
    return Embedding(ids, x), history


class SmacofMDS(BaseEstimator):
    """Estimator form of :func:`smacof`; expects a precomputed distance matrix.

    After fit, ``embedding_`` holds the coordinates and ``stress_history_``
    the per-iteration stress trace.
    """

    def __init__(self, n_components: int = 3, max_iter: int = 300, eps: float = 1e-6, random_state: int = 0):
        self.n_components = n_components
        self.max_iter = max_iter
        self.eps = eps
        self.random_state = random_state

    def fit(self, D, y=None):
        cfg = MdsConfig(self.n_components, self.max_iter, self.eps, self.random_state)
        emb, history = smacof(D, cfg)
        self.embedding_ = emb.coords
        self.stress_history_ = history
        return self

    def fit_transform(self, D, y=None) -> np.ndarray:
        return self.fit(D).embedding_

    def transform(self, D) -> np.ndarray:
        if not hasattr(self, "embedding_"):
            raise NotFittedError("SmacofMDS is not fitted")
        return self.embedding_
