"""Acceptance gate: one test per criterion, each printing a PASS line.

The heavyweight synthetic training run (criteria 4-6) is built once per
session and shared.
"""

import json
import math
import time
from dataclasses import dataclass

import numpy as np
import pytest

from seqembed import (
    ClusterLabels,
    DEFAULT_SCHEME,
    NetworkSpec,
    TrainConfig,
    embed,
    init_weights,
    kmeans,
    loss_and_grads,
    distance_heatmap,
    one_hot_encode,
    oos_accuracy,
    oos_protocol,
    ordinal_encode,
    pairwise_matrix,
    rect_matrix,
    reference_encode,
    sample_references,
    silhouette,
    smacof,
    stress,
    sw_score,
    synth_dataset,
    train,
    MdsConfig,
    Sequence,
    SequenceSet,
)
from seqembed.cli import PipelineConfig, main as cli_main
from oracles import brute_silhouette, finite_difference_grads, naive_sw_score


def report(criterion: int, detail: str) -> None:
    print(f"[criterion {criterion:2d}] PASS: {detail}")


@dataclass
class TrainingRun:
    sset: SequenceSet
    true_labels: dict
    panel: object
    encoded: object
    spec: NetworkSpec
    cfg: TrainConfig
    weights: object
    history: list
    embedding: object
    elapsed: float
    rerun_weights: object
    rerun_history: list


@pytest.fixture(scope="session")
def training_run() -> TrainingRun:
    """Criterion 4 workload: 5x100 sequences, panel of 50, 100 epochs."""
    start = time.perf_counter()
    sset, true_labels = synth_dataset(5, 100, 200, 0.05, rng_seed=42)
    panel = sample_references(sset, 50, rng_seed=7)
    encoded = reference_encode(sset, panel, threads=1)
    spec = NetworkSpec(50, (128, 3))
    cfg = TrainConfig(epochs=100, batch_size=16, learning_rate=1e-2, init_seed=1, shuffle_seed=2)
    weights, history = train(encoded, spec, cfg)
    embedding = embed(weights, encoded)
    elapsed = time.perf_counter() - start
    rerun_weights, rerun_history = train(encoded, spec, cfg)
    return TrainingRun(
        sset, true_labels, panel, encoded, spec, cfg,
        weights, history, embedding, elapsed, rerun_weights, rerun_history,
    )


def test_criterion_01_sw_oracle_equivalence(rng):
    pairs = []
    for _ in range(200):
        a = "".join(rng.choice(list("ATGC"), rng.integers(1, 51)))
        b = "".join(rng.choice(list("ATGC"), rng.integers(1, 51)))
        pairs.append((a, b))
    start = time.perf_counter()
    for a, b in pairs:
        assert sw_score(a, b, DEFAULT_SCHEME) == naive_sw_score(a, b, 2, -1, -2)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report(1, f"200 random pairs match the naive full-table oracle exactly ({elapsed:.2f}s)")


def test_criterion_02_encoding_golden_vectors():
    onehot = one_hot_encode(SequenceSet([Sequence("x", "ATGC")]), target_len=4)
    assert onehot.features[0].tolist() == [0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0]
    ordinal = ordinal_encode(SequenceSet([Sequence("x", "GGTAC")]), target_len=5)
    assert ordinal.features[0].tolist() == [0.75, 0.75, 0.5, 0.25, 1.0]
    report(2, "one-hot ATGC and ordinal GGTAC reproduce the published example vectors")


def test_criterion_03_gradient_check():
    spec = NetworkSpec(10, (6, 3))
    w = init_weights(spec, 6)
    x = np.random.default_rng(106).random((8, 10))

    # Guard: no pre-activation sits within 10x the finite-difference step
    # of a rectifier kink, so central differences stay on one side.
    h = x
    for layer in range(spec.n_layers):
        z = h @ w.weights[layer].T + w.biases[layer]
        if layer < spec.n_layers - 1:
            assert np.abs(z).min() > 1e-4
        if layer == spec.bottleneck_layer:
            h = np.where(z > 0.0, z, spec.alpha * z)
        elif layer < spec.n_layers - 1:
            h = np.maximum(z, 0.0)

    start = time.perf_counter()
    _, grads = loss_and_grads(w, x)
    numeric = finite_difference_grads(
        lambda: loss_and_grads(w, x)[0], w.weights + w.biases, step=1e-5
    )
    worst = 0.0
    checked = 0
    for analytic, fd in zip(grads.weights + grads.biases, numeric):
        scale = np.maximum(np.abs(analytic), np.abs(fd))
        assert scale.min() > 0.0  # every parameter has a live gradient here
        rel = np.abs(analytic - fd) / scale
        worst = max(worst, float(rel.max()))
        checked += rel.size
    elapsed = time.perf_counter() - start
    assert worst < 1e-4
    assert elapsed < 5.0
    report(3, f"{checked} gradients within {worst:.2e} relative error of central differences ({elapsed:.2f}s)")


def test_criterion_04_training_sanity(training_run):
    run = training_run
    assert len(run.history) == 100
    assert run.history[-1] < 0.5 * run.history[0]
    assert run.weights == run.rerun_weights
    assert run.history == run.rerun_history
    assert run.elapsed < 120.0
    report(
        4,
        f"loss {run.history[0]:.4f} -> {run.history[-1]:.4f} "
        f"({run.history[-1] / run.history[0]:.3f}x) in {run.elapsed:.1f}s, replays bit-identically",
    )


def test_criterion_05_embedding_quality(training_run):
    run = training_run
    truth = np.array([run.true_labels[s.id] for s in run.sset])
    sc_mean, _ = silhouette(run.embedding, truth)
    assert sc_mean >= 0.3
    grid = distance_heatmap(
        (run.sset, DEFAULT_SCHEME), run.embedding, pairs=10_000, bins=64, rng_seed=17
    )
    assert grid.pair_count == 10_000
    assert grid.pearson >= 0.7
    report(5, f"silhouette {sc_mean:.3f} >= 0.3, pearson {grid.pearson:.3f} >= 0.7 over 10k pairs")


def test_criterion_06_out_of_sample_protocol(training_run):
    run = training_run
    cfg = TrainConfig(
        epochs=1000, batch_size=512, learning_rate=1e-2, init_seed=1, shuffle_seed=2
    )
    protocol = oos_protocol(run.sset, run.panel, run.spec, cfg, k=5, holdout=0.1, rng_seed=11)
    assert protocol.n_holdout == 50
    assert protocol.accuracy >= 0.95

    ids = [f"p{i}" for i in range(8000)]
    baseline = ClusterLabels(ids, np.zeros(8000, dtype=np.int64), 22)
    flipped = ClusterLabels(ids, np.array([1] * 17 + [0] * 7983, dtype=np.int64), 22)
    acc4000 = oos_accuracy(baseline, flipped, ids[:4000])
    acc8000 = oos_accuracy(baseline, flipped, ids)
    assert acc4000.accuracy == 1.0 - 17 / 4000 == 0.99575
    assert acc8000.accuracy == 1.0 - 17 / 8000
    assert math.floor(acc4000.accuracy * 10000) / 100 == 99.57
    assert math.floor(acc8000.accuracy * 10000) / 100 == 99.78
    report(
        6,
        f"holdout accuracy {protocol.accuracy:.4f} >= 0.95 "
        f"({protocol.mismatches}/{protocol.n_holdout} mismatches); golden ratios exact",
    )


def test_criterion_07_smacof_convergence():
    points = np.random.default_rng(100).normal(size=(50, 3))
    diff = points[:, None] - points[None]
    target = np.sqrt((diff**2).sum(-1))
    start = time.perf_counter()
    emb, history = smacof(target, MdsConfig(target_dim=3, max_iter=5000, eps=1e-15, rng_seed=0))
    elapsed = time.perf_counter() - start
    assert history[-1] < 1e-6 * history[0]
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))
    assert abs(stress(emb, target) - history[-1]) <= 1e-9 * max(1.0, history[0])
    assert elapsed < 10.0
    report(
        7,
        f"stress {history[0]:.3e} -> {history[-1]:.3e} over {len(history) - 1} "
        f"non-increasing iterations ({elapsed:.2f}s)",
    )


def test_criterion_08_silhouette_oracle():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((100, 3))
    labels = rng.integers(0, 4, 100)
    mean, per_point = silhouette(x, labels)
    brute_mean, brute_points = brute_silhouette(x, labels)
    assert abs(mean - brute_mean) < 1e-12
    assert np.abs(per_point - brute_points).max() < 1e-12
    permuted = (labels + 3) % 4
    _, per_permuted = silhouette(x, permuted)
    assert np.array_equal(per_point, per_permuted)
    report(8, f"mean silhouette {mean:.6f} matches brute force within 1e-12; relabeling exact")


def test_criterion_09_determinism(tmp_path):
    sset, _ = synth_dataset(4, 25, 120, 0.1, rng_seed=33)
    assert len(sset) == 100
    one = pairwise_matrix(sset, threads=1)
    eight = pairwise_matrix(sset, threads=8)
    assert one.values.tobytes() == eight.values.tobytes()

    fasta = tmp_path / "replay.fasta"
    assert cli_main([
        "synth", "--clusters", "3", "--per-cluster", "8", "--seed-len", "40",
        "--mutation-rate", "0.08", "--seed", "21", "--out", str(fasta),
    ]) == 0
    artifacts = [
        "panel.tsv", "encoded.enc", "model.aemd", "loss_history.tsv",
        "embedding.tsv", "labels.tsv", "centroids.tsv", "heatmap.csv",
        "heatmap.csv.meta.json", "run_summary.json",
    ]
    digests = []
    for run_dir in ("r1", "r2"):
        cfg = PipelineConfig(
            input=str(fasta), workdir=str(tmp_path / run_dir), k=6, clusters=3,
            epochs=20, batch_size=8, learning_rate=1e-2,
            heatmap_pairs=150, heatmap_bins=8, seed=13,
        )
        path = tmp_path / f"{run_dir}.ini"
        cfg.to_ini(path)
        assert cli_main(["pipeline", "--config", str(path), "--arm", "c"]) == 0
        digests.append([(tmp_path / run_dir / n).read_bytes() for n in artifacts])
    assert digests[0] == digests[1]
    report(9, "1 vs 8 threads byte-identical; pipeline replay reproduced every artifact")


def test_criterion_10_cost_accounting():
    sset, _ = synth_dataset(3, 40, 60, 0.1, rng_seed=3)
    n = len(sset)
    square = pairwise_matrix(sset)
    assert square.alignments == n * (n - 1) // 2 == 7140
    refs = SequenceSet(sset.sequences[:30])
    rect = rect_matrix(sset, refs)
    assert rect.alignments == n * 30 == 3600
    # Same accounting at the published scale: 170K sequences need ~14.5
    # billion pairwise alignments but only 170M against a 1000-reference panel.
    assert 170_000 * (170_000 - 1) // 2 == 14_449_915_000
    assert 170_000 * 1_000 == 170_000_000
    report(10, f"distmat reports {square.alignments} = N(N-1)/2 and rect {rect.alignments} = N*K")


def test_acceptance_summary_is_machine_readable(tmp_path):
    # The run summary doubles as the machine-readable record of a run.
    fasta = tmp_path / "s.fasta"
    assert cli_main([
        "synth", "--clusters", "2", "--per-cluster", "4", "--seed-len", "30",
        "--mutation-rate", "0.1", "--seed", "2", "--out", str(fasta),
        "--summary", str(tmp_path / "synth.json"),
    ]) == 0
    summary = json.loads((tmp_path / "synth.json").read_text())
    assert summary["stage"] == "synth"
    assert summary["sequences"] == 8
