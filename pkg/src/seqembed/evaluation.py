"""Embedding-quality evaluation: clustering, silhouettes, distance heatmaps,
and the held-out-point consistency protocol."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.exceptions import NotFittedError

from .alignment import DistanceMatrix, ScoringScheme, sw_distance
from .autoencoder import Embedding, NetworkSpec, TrainConfig, embed, train
from .encoding import ReferencePanel, reference_encode
from .errors import FormatError
from .sequences import SequenceSet
from .validation import check_features


@dataclass
class ClusterLabels:
    """Integer cluster index per id, with indices in [0, k)."""

    ids: list[str]
    labels: np.ndarray
    k: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1 or len(self.ids) != self.labels.shape[0]:
            raise ValueError("ids and labels must align 1:1")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise ValueError(f"labels must lie in [0, {self.k})")

    def label_of(self, seq_id: str) -> int:
        if not hasattr(self, "_index"):
            self._index = {i: n for n, i in enumerate(self.ids)}
        try:
            return int(self.labels[self._index[seq_id]])
        except KeyError:
            raise LookupError(f"id {seq_id!r} has no cluster label") from None

    def write_tsv(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("id\tlabel\n")
            for seq_id, label in zip(self.ids, self.labels):
                fh.write(f"{seq_id}\t{label}\n")

    @classmethod
    def read_tsv(cls, path: Union[str, Path]) -> "ClusterLabels":
        ids, labels = [], []
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline()
            if not header.startswith("id\t"):
                raise FormatError(f"{path}: missing labels header")
            for line in fh:
                seq_id, label = line.rstrip("\n").split("\t")
                ids.append(seq_id)
                labels.append(int(label))
        arr = np.array(labels, dtype=np.int64)
        return cls(ids, arr, int(arr.max()) + 1 if arr.size else 0)


class KMeansResult(NamedTuple):
    labels: ClusterLabels
    centroids: np.ndarray
    objective_history: list[float]


def _coords_and_ids(emb) -> tuple[np.ndarray, list[str]]:
    if isinstance(emb, Embedding):
        return emb.coords, emb.ids
    x = check_features(emb, "coords")
    return x, [str(i) for i in range(x.shape[0])]


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = x[:, None, :] - centers[None, :, :]
    return (d * d).sum(axis=2)


def _plus_plus_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[int(rng.integers(n))]
    closest = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:  # all remaining points coincide with chosen centers
            idx = int(rng.integers(n))
        centers[c] = x[idx]
        closest = np.minimum(closest, ((x - centers[c]) ** 2).sum(axis=1))
    return centers


def kmeans(
    emb,
    k: int,
    init: Union[str, np.ndarray] = "k-means++",
    rng_seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> KMeansResult:
    """Lloyd iterations from seeded k-means++ or caller-fixed centers.

    With fixed centers the first assignment comes straight from them, so
    cluster indices stay comparable to the run that produced the centers.
    An emptied cluster is re-seeded at the point farthest from its assigned
    center, keeping k constant. The recorded objective (sum of squared
    point-to-center distances after each assignment) never increases.
    """
    x, ids = _coords_and_ids(emb)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")

    if isinstance(init, str):
        if init != "k-means++":
            raise ValueError(f"unknown init {init!r}")
        centers = _plus_plus_init(x, k, np.random.default_rng(rng_seed))
    else:
        centers = np.array(init, dtype=np.float64)
        if centers.shape != (k, x.shape[1]):
            raise ValueError(f"fixed centers must have shape {(k, x.shape[1])}, got {centers.shape}")

    history: list[float] = []
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        sq = _sq_dists(x, centers)
        labels = sq.argmin(axis=1)
        point_sq = sq[np.arange(n), labels]
        sizes = np.bincount(labels, minlength=k)
        for empty in np.setdiff1d(np.arange(k), labels):
            # Re-seed at the farthest point whose donor cluster stays nonempty.
            eligible = np.where(sizes[labels] > 1, point_sq, -1.0)
            farthest = int(eligible.argmax())
            sizes[labels[farthest]] -= 1
            sizes[empty] += 1
            centers[empty] = x[farthest]
            labels[farthest] = empty
            point_sq[farthest] = 0.0
        history.append(float(point_sq.sum()))
        new_centers = np.stack([x[labels == c].mean(axis=0) for c in range(k)])
        movement = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if movement < tol:
            break
    return KMeansResult(ClusterLabels(ids, labels, k), centers, history)


def silhouette(emb, labels) -> tuple[float, np.ndarray]:
    """Mean and per-point silhouette scores under Euclidean distance.

    Per-point score is (b - a) / max(a, b) where a is the mean distance to
    the point's own cluster (self excluded) and b the smallest mean
    distance to any other cluster. Singletons, and points with a = b = 0,
    score 0.
    """
    x, ids = _coords_and_ids(emb)
    if isinstance(labels, ClusterLabels):
        if isinstance(emb, Embedding) and labels.ids != emb.ids:
            raise ValueError("label ids do not match embedding ids")
        lab = labels.labels
    else:
        lab = np.asarray(labels, dtype=np.int64)
    n = x.shape[0]
    if lab.shape != (n,):
        raise ValueError(f"expected {n} labels, got shape {lab.shape}")
    uniq = np.unique(lab)
    if uniq.size < 2:
        raise ValueError("silhouette requires at least 2 clusters")

    dist = np.sqrt(np.maximum(_sq_dists(x, x), 0.0))
    member = (lab[:, None] == uniq[None, :]).astype(np.float64)  # n x k indicator
    sums = dist @ member
    sizes = member.sum(axis=0)
    own = np.searchsorted(uniq, lab)

    own_size = sizes[own]
    with np.errstate(invalid="ignore", divide="ignore"):
        a = sums[np.arange(n), own] / np.maximum(own_size - 1.0, 1.0)
        mean_other = sums / sizes[None, :]
        mean_other[np.arange(n), own] = np.inf
        b = mean_other.min(axis=1)
        s = (b - a) / np.maximum(a, b)
    s = np.where(own_size <= 1, 0.0, s)  # singleton convention
    s = np.nan_to_num(s, nan=0.0)  # a = b = 0 convention
    return float(s.mean()), s


@dataclass
class HeatmapGrid:
    """2-D histogram of (input distance, embedded distance) pairs on [0,1]^2.

    Rows bin the input distance, columns the embedded distance after
    min-max normalization over the sample; ``pearson`` is computed on the
    raw pairs. ``y_min``/``y_max`` record the normalization applied.
    """

    counts: np.ndarray
    pearson: float
    pair_count: int
    y_min: float
    y_max: float
    rng_seed: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if int(self.counts.sum()) != self.pair_count:
            raise ValueError("histogram counts do not sum to the sampled pair count")
        if not -1.0 <= self.pearson <= 1.0:
            raise ValueError(f"pearson out of range: {self.pearson}")

    def save_csv(self, path: Union[str, Path]) -> None:
        np.savetxt(path, self.counts, fmt="%d", delimiter=",")
        meta = {
            "pairs": self.pair_count,
            "seed": self.rng_seed,
            "pearson": self.pearson,
            "embedded_distance_min": self.y_min,
            "embedded_distance_max": self.y_max,
            "bins": int(self.counts.shape[0]),
        }
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def distance_heatmap(
    input_d: Union[DistanceMatrix, np.ndarray, tuple[SequenceSet, ScoringScheme]],
    emb,
    pairs: int = 10_000,
    bins: int = 64,
    rng_seed: int = 0,
) -> HeatmapGrid:
    """Sample point pairs and histogram input vs embedded distance.

    ``input_d`` is either a precomputed distance matrix or a
    (SequenceSet, ScoringScheme) tuple, in which case only the sampled
    pairs are aligned; that keeps large inputs usable without the full
    square matrix. If ``pairs`` covers every unordered pair, the exhaustive
    set is used instead of sampling.
    """
    if pairs < 1:
        raise ValueError(f"pairs must be >= 1, got {pairs}")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    coords, _ = _coords_and_ids(emb)
    n = coords.shape[0]
    if n < 2:
        raise ValueError("need at least 2 embedded points")

    all_pairs = n * (n - 1) // 2
    if pairs >= all_pairs:
        ii, jj = np.triu_indices(n, k=1)
    else:
        rng = np.random.default_rng(rng_seed)
        ii = rng.integers(0, n, size=pairs)
        jj = rng.integers(0, n - 1, size=pairs)
        jj = jj + (jj >= ii)

    if isinstance(input_d, tuple):
        sset, scheme = input_d
        if len(sset) != n:
            raise ValueError("sequence set size does not match embedding")
        x = np.array([sw_distance(sset[int(i)], sset[int(j)], scheme) for i, j in zip(ii, jj)])
    else:
        values = input_d.values if isinstance(input_d, DistanceMatrix) else np.asarray(input_d)
        if values.shape[0] != n or values.shape[1] != n:
            raise ValueError("distance matrix shape does not match embedding")
        x = values[ii, jj].astype(np.float64)

    y = np.sqrt(((coords[ii] - coords[jj]) ** 2).sum(axis=1))
    y_min, y_max = float(y.min()), float(y.max())
    y_norm = (y - y_min) / (y_max - y_min) if y_max > y_min else np.zeros_like(y)

    counts, _, _ = np.histogram2d(x, y_norm, bins=bins, range=[[0.0, 1.0], [0.0, 1.0]])
    with np.errstate(invalid="ignore"):
        r = np.corrcoef(x, y)[0, 1]
    pearson = 0.0 if np.isnan(r) else float(r)
    return HeatmapGrid(counts.astype(np.int64), pearson, len(ii), y_min, y_max, rng_seed)


@dataclass
class OosAccuracy:
    accuracy: float
    mismatches: int
    mismatch_ids: list[str]


def oos_accuracy(
    baseline_labels: ClusterLabels, oos_labels: ClusterLabels, heldout_ids: list[str]
) -> OosAccuracy:
    """Fraction of held-out ids assigned the same cluster index in both runs.

    Comparable only when the second run's clusters were seeded from the
    first run's centers so that indices mean the same thing.
    """
    if not heldout_ids:
        raise ValueError("heldout_ids is empty")
    mismatch_ids = [
        seq_id
        for seq_id in heldout_ids
        if baseline_labels.label_of(seq_id) != oos_labels.label_of(seq_id)
    ]
    mismatches = len(mismatch_ids)
    return OosAccuracy(1.0 - mismatches / len(heldout_ids), mismatches, mismatch_ids)


@dataclass
class OosReport:
    n_total: int
    n_holdout: int
    holdout_ids: list[str]
    accuracy: float
    mismatches: int
    mismatch_ids: list[str]
    k: int
    holdout_fraction: float
    rng_seed: int
    panel_k: int
    panel_seed: int
    spec: dict
    train_config: dict
    baseline_final_loss: float
    retrain_final_loss: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        lines = [
            "out-of-sample consistency report",
            f"  points: {self.n_total} total, {self.n_holdout} held out "
            f"(fraction {self.holdout_fraction})",
            f"  clusters: {self.k}",
            f"  panel: k={self.panel_k} seed={self.panel_seed}",
            f"  protocol seed: {self.rng_seed}",
            f"  network: {self.spec}",
            f"  training: {self.train_config}",
            f"  baseline final loss: {self.baseline_final_loss:.6g}",
            f"  retrain final loss: {self.retrain_final_loss:.6g}",
            f"  mismatches: {self.mismatches}/{self.n_holdout}",
            f"  accuracy: {self.accuracy:.6f}",
        ]
        if self.mismatch_ids:
            lines.append("  mismatched ids: " + ", ".join(self.mismatch_ids))
        return "\n".join(lines) + "\n"


def oos_protocol(
    sset: SequenceSet,
    panel: ReferencePanel,
    spec: NetworkSpec,
    cfg: TrainConfig,
    k: int,
    holdout: float,
    rng_seed: int,
    threads: int = 1,
) -> OosReport:
    """Measure how consistently held-out points land in baseline clusters.

    Baseline: train on every point, embed, cluster with seeded k-means++.
    Holdout arm: retrain from the same initial weights with a random
    fraction excluded, embed everything with the retrained encoder, and
    cluster with the baseline centers as fixed initialization. Accuracy is
    the fraction of held-out points keeping their baseline cluster index.
    """
    if not 0.0 < holdout < 1.0:
        raise ValueError(f"holdout fraction must be in (0, 1), got {holdout}")
    if spec.input_dim != panel.k:
        raise ValueError(f"spec input_dim {spec.input_dim} != panel size {panel.k}")
    n = len(sset)
    n_holdout = int(round(holdout * n))
    if n_holdout == 0:
        raise ValueError(f"holdout fraction {holdout} selects 0 of {n} points")
    if n_holdout >= n:
        raise ValueError(f"holdout fraction {holdout} leaves nothing to train on")

    holdout_seed, kmeans_seed = (int(s) for s in np.random.SeedSequence(rng_seed).generate_state(2))

    encoded = reference_encode(sset, panel, threads=threads)
    w_base, base_history = train(encoded, spec, cfg)
    emb_base = embed(w_base, encoded)
    base_result = kmeans(emb_base, k, rng_seed=kmeans_seed)

    holdout_idx = np.sort(np.random.default_rng(holdout_seed).choice(n, n_holdout, replace=False))
    holdout_ids = [sset[int(i)].id for i in holdout_idx]
    keep = np.setdiff1d(np.arange(n), holdout_idx)

    w_oos, oos_history = train(encoded.features[keep], spec, cfg)
    emb_oos = embed(w_oos, encoded)
    oos_result = kmeans(emb_oos, k, init=base_result.centroids)

    acc = oos_accuracy(base_result.labels, oos_result.labels, holdout_ids)
    return OosReport(
        n_total=n,
        n_holdout=n_holdout,
        holdout_ids=holdout_ids,
        accuracy=acc.accuracy,
        mismatches=acc.mismatches,
        mismatch_ids=acc.mismatch_ids,
        k=k,
        holdout_fraction=holdout,
        rng_seed=rng_seed,
        panel_k=panel.k,
        panel_seed=panel.rng_seed,
        spec=asdict(spec),
        train_config=asdict(cfg),
        baseline_final_loss=base_history[-1],
        retrain_final_loss=oos_history[-1],
    )


class LloydKMeans(BaseEstimator, ClusterMixin):
    """Estimator wrapper over :func:`kmeans`.

    Parameters
    ----------
    n_clusters : int
    init : "k-means++" or array of shape (n_clusters, dim)
        Fixed centers keep cluster indices comparable across fits.
    random_state : int
    """

    def __init__(
        self,
        n_clusters: int = 8,
        init: Union[str, np.ndarray] = "k-means++",
        random_state: int = 0,
        max_iter: int = 300,
        tol: float = 1e-6,
    ):
        self.n_clusters = n_clusters
        self.init = init
        self.random_state = random_state
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        result = kmeans(
            X,
            self.n_clusters,
            init=self.init,
            rng_seed=self.random_state,
            max_iter=self.max_iter,
            tol=self.tol,
        )
        self.cluster_centers_ = result.centroids
        self.labels_ = result.labels.labels
        self.objective_history_ = result.objective_history
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "cluster_centers_"):
            raise NotFittedError("LloydKMeans is not fitted")
        x = check_features(X)
        return _sq_dists(x, self.cluster_centers_).argmin(axis=1)
