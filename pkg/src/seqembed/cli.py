"""Subcommand driver wiring the pipeline stages together.

Every stage reads and writes files, so runs can be resumed, inspected, and
replayed; a resolved config names an explicit seed for each stochastic
stage, making replays byte-identical. The default work directory comes
from ``SEQEMBED_WORKDIR`` when set.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import DistanceMatrix, ScoringScheme, pairwise_matrix, rect_matrix
from .autoencoder import (
    Embedding,
    NetworkSpec,
    TrainConfig,
    embed,
    load_model_file,
    save_model_file,
    train,
)
from .encoding import (
    EncodedDataset,
    ReferencePanel,
    one_hot_encode,
    ordinal_encode,
    reference_encode,
    sample_references,
)
from .errors import SeqEmbedError
from .evaluation import (
    ClusterLabels,
    distance_heatmap,
    kmeans,
    oos_protocol,
    silhouette,
)
from .mds import MdsConfig, smacof
from .sequences import (
    Alphabet,
    SequenceSet,
    dedup,
    parse_fasta,
    synth_dataset,
    write_fasta,
    write_multiplicity_tsv,
)

logger = logging.getLogger("seqembed")

_SEED_STAGES = ("panel_seed", "init_seed", "shuffle_seed", "kmeans_seed", "heatmap_seed", "oos_seed", "mds_seed")


@dataclass
class PipelineConfig:
    """Resolved parameters for a full pipeline run; round-trips through INI."""

    input: str = ""
    workdir: str = ""
    alphabet: str = "ATGC"
    match: int = 2
    mismatch: int = -1
    gap: int = -2
    kind: str = "reference"
    k: int = 100
    target_len: int | None = None
    panel_seed: int | None = None
    encoder_hidden: tuple[int, ...] = (128, 3)
    alpha: float = 0.01
    output_activation: str = "linear"
    epochs: int = 100
    batch_size: int = 256
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    momentum: float = 0.0
    init_seed: int | None = None
    shuffle_seed: int | None = None
    clusters: int = 5
    heatmap_pairs: int = 10_000
    heatmap_bins: int = 64
    heatmap_seed: int | None = None
    holdout: float = 0.1
    oos_seed: int | None = None
    kmeans_seed: int | None = None
    mds_dim: int = 3
    mds_max_iter: int = 300
    mds_eps: float = 1e-6
    mds_seed: int | None = None
    seed: int = 0
    threads: int = 1

    _SECTIONS = {
        "paths": ("input", "workdir"),
        "data": ("alphabet",),
        "scheme": ("match", "mismatch", "gap"),
        "encoding": ("kind", "k", "target_len", "panel_seed"),
        "network": ("encoder_hidden", "alpha", "output_activation"),
        "training": (
            "epochs",
            "batch_size",
            "learning_rate",
            "optimizer",
            "beta1",
            "beta2",
            "eps",
            "momentum",
            "init_seed",
            "shuffle_seed",
        ),
        "evaluation": (
            "clusters",
            "heatmap_pairs",
            "heatmap_bins",
            "heatmap_seed",
            "holdout",
            "oos_seed",
            "kmeans_seed",
        ),
        "mds": ("mds_dim", "mds_max_iter", "mds_eps", "mds_seed"),
        "run": ("seed", "threads"),
    }

    def resolve_seeds(self) -> "PipelineConfig":
        """Fill every unset stage seed deterministically from the global seed."""
        derived = np.random.SeedSequence(self.seed).generate_state(len(_SEED_STAGES))
        for name, value in zip(_SEED_STAGES, derived):
            if getattr(self, name) is None:
                setattr(self, name, int(value))
        return self

    def scheme(self) -> ScoringScheme:
        return ScoringScheme(self.match, self.mismatch, self.gap)

    def network_spec(self, input_dim: int) -> NetworkSpec:
        return NetworkSpec(input_dim, self.encoder_hidden, self.alpha, self.output_activation)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            optimizer=self.optimizer,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            momentum=self.momentum,
            init_seed=self.init_seed if self.init_seed is not None else 0,
            shuffle_seed=self.shuffle_seed if self.shuffle_seed is not None else 0,
        )

    def to_ini(self, path: str | Path) -> None:
        parser = configparser.ConfigParser()
        for section, keys in self._SECTIONS.items():
            parser[section] = {}
            for key in keys:
                value = getattr(self, key)
                if value is None:
                    text = ""
                elif key == "encoder_hidden":
                    text = ",".join(str(w) for w in value)
                else:
                    text = repr(value) if isinstance(value, float) else str(value)
                parser[section][key] = text
        with open(path, "w", encoding="ascii") as fh:
            parser.write(fh)

    @classmethod
    def from_ini(cls, path: str | Path) -> "PipelineConfig":
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise FileNotFoundError(f"config file not found: {path}")
        types = {f.name: f.type for f in fields(cls)}
        cfg = cls()
        for section in parser.sections():
            if section not in cls._SECTIONS:
                raise ValueError(f"unknown config section [{section}]")
            for key, text in parser[section].items():
                if key not in cls._SECTIONS[section]:
                    raise ValueError(f"unknown config key {key!r} in [{section}]")
                setattr(cfg, key, cls._parse_value(key, text, types[key]))
        return cfg

    @staticmethod
    def _parse_value(key: str, text: str, type_name: str):
        text = text.strip()
        if text == "":
            return None if "None" in type_name else ""
        if key == "encoder_hidden":
            return tuple(int(w) for w in text.split(","))
        if "int" in type_name:
            return int(text)
        if "float" in type_name:
            return float(text)
        return text


def _write_summary(path: Path, summary: dict) -> None:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _maybe_summary(args, summary: dict) -> None:
    if getattr(args, "summary", None):
        _write_summary(Path(args.summary), summary)


def _scheme_from(args) -> ScoringScheme:
    return ScoringScheme(args.match, args.mismatch, args.gap)


def _add_scheme_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--match", type=int, default=2)
    parser.add_argument("--mismatch", type=int, default=-1)
    parser.add_argument("--gap", type=int, default=-2)


def _parse_hidden(text: str) -> tuple[int, ...]:
    return tuple(int(w) for w in text.split(","))


def _read_centroids(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter="\t", ndmin=2)


def _write_centroids(path: str | Path, centers: np.ndarray) -> None:
    np.savetxt(path, centers, fmt="%.17g", delimiter="\t")


def _epoch_logger(epochs: int):
    every = max(1, epochs // 10)

    def on_batch(epoch: int, batch_index: int, loss: float) -> None:
        if batch_index == 0 and epoch % every == 0:
            logger.info("epoch %d/%d starting (batch loss %.6g)", epoch + 1, epochs, loss)

    return on_batch


def cmd_synth(args) -> int:
    sset, labels = synth_dataset(
        args.clusters, args.per_cluster, args.seed_len, args.mutation_rate, args.seed
    )
    write_fasta(sset, args.out)
    if args.labels_out:
        arr = np.array([labels[s.id] for s in sset], dtype=np.int64)
        ClusterLabels(sset.ids, arr, args.clusters).write_tsv(args.labels_out)
    logger.info("wrote %d sequences in %d clusters to %s", len(sset), args.clusters, args.out)
    _maybe_summary(args, {
        "stage": "synth",
        "sequences": len(sset),
        "clusters": args.clusters,
        "seed": args.seed,
        "out": args.out,
    })
    return 0


def cmd_dedup(args) -> int:
    sset = parse_fasta(Path(args.input), Alphabet(args.alphabet))
    result = dedup(sset)
    write_fasta(result.unique, args.out)
    if args.recurrent_out:
        write_fasta(result.recurrent, args.recurrent_out)
    if args.multiplicity_out:
        write_multiplicity_tsv(result.multiplicity, args.multiplicity_out)
    logger.info(
        "%d sequences: %d unique, %d recurrent", len(sset), len(result.unique), len(result.recurrent)
    )
    _maybe_summary(args, {
        "stage": "dedup",
        "total": len(sset),
        "unique": len(result.unique),
        "recurrent": len(result.recurrent),
    })
    return 0


def cmd_distmat(args) -> int:
    sset = parse_fasta(Path(args.input), Alphabet(args.alphabet))
    matrix = pairwise_matrix(sset, _scheme_from(args), threads=args.threads, max_bytes=args.max_bytes)
    matrix.save(args.out)
    if args.csv_out:
        matrix.to_csv(args.csv_out)
    print(f"alignments: {matrix.alignments}")
    print(f"cells: {matrix.cells}")
    _maybe_summary(args, {
        "stage": "distmat",
        "n": len(sset),
        "alignments": matrix.alignments,
        "cells": matrix.cells,
        "out": args.out,
    })
    return 0


def cmd_sample_refs(args) -> int:
    sset = parse_fasta(Path(args.input), Alphabet(args.alphabet))
    panel = sample_references(sset, args.k, args.seed, _scheme_from(args))
    panel.save(args.out)
    logger.info("sampled %d references (seed %d) to %s", panel.k, args.seed, args.out)
    _maybe_summary(args, {"stage": "sample-refs", "k": panel.k, "seed": args.seed, "out": args.out})
    return 0


def cmd_encode(args) -> int:
    alphabet = Alphabet(args.alphabet)
    sset = parse_fasta(Path(args.input), alphabet)
    if args.kind == "onehot":
        encoded = one_hot_encode(sset, alphabet, args.target_len)
    elif args.kind == "ordinal":
        encoded = ordinal_encode(sset, None, args.target_len, alphabet)
    else:
        if not args.panel:
            raise ValueError("--panel is required for reference encoding")
        panel = ReferencePanel.load(args.panel)
        refs = parse_fasta(Path(args.refs), alphabet) if args.refs else None
        encoded = reference_encode(sset, panel, threads=args.threads, refs=refs)
    encoded.save(args.out)
    logger.info("encoded %d sequences to %d features (%s)", encoded.n, encoded.dim, args.kind)
    _maybe_summary(args, {
        "stage": "encode",
        "kind": args.kind,
        "n": encoded.n,
        "dim": encoded.dim,
        "out": args.out,
    })
    return 0


def cmd_train(args) -> int:
    data = EncodedDataset.load(args.input)
    spec = NetworkSpec(data.dim, _parse_hidden(args.encoder_hidden), args.alpha, args.output_activation)
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        optimizer=args.optimizer,
        beta1=args.beta1,
        beta2=args.beta2,
        eps=args.eps,
        momentum=args.momentum,
        init_seed=args.init_seed,
        shuffle_seed=args.shuffle_seed,
    )
    weights, history = train(data, spec, cfg, on_batch=_epoch_logger(cfg.epochs))
    save_model_file(weights, args.out)
    if args.history_out:
        with open(args.history_out, "w", encoding="ascii") as fh:
            fh.write("epoch\tloss\n")
            for i, loss in enumerate(history):
                fh.write(f"{i}\t{loss:.17g}\n")
    print(f"epochs: {len(history)}")
    print(f"first epoch loss: {history[0]:.6g}")
    print(f"final epoch loss: {history[-1]:.6g}")
    _maybe_summary(args, {
        "stage": "train",
        "epochs": len(history),
        "first_loss": history[0],
        "final_loss": history[-1],
        "out": args.out,
    })
    return 0


def cmd_embed(args) -> int:
    data = EncodedDataset.load(args.input)
    weights = load_model_file(args.model)
    embedding = embed(weights, data)
    embedding.write_tsv(args.out)
    logger.info("embedded %d points to %d dimensions", len(embedding.ids), embedding.dim)
    _maybe_summary(args, {
        "stage": "embed",
        "n": len(embedding.ids),
        "dim": embedding.dim,
        "out": args.out,
    })
    return 0


def cmd_kmeans(args) -> int:
    embedding = Embedding.read_tsv(args.input)
    init = _read_centroids(args.init_centroids) if args.init_centroids else "k-means++"
    result = kmeans(embedding, args.k, init=init, rng_seed=args.seed, max_iter=args.max_iter, tol=args.tol)
    result.labels.write_tsv(args.out)
    if args.centroids_out:
        _write_centroids(args.centroids_out, result.centroids)
    print(f"objective: {result.objective_history[-1]:.6g}")
    _maybe_summary(args, {
        "stage": "kmeans",
        "k": args.k,
        "objective": result.objective_history[-1],
        "iterations": len(result.objective_history),
        "out": args.out,
    })
    return 0


def cmd_silhouette(args) -> int:
    embedding = Embedding.read_tsv(args.input)
    labels = ClusterLabels.read_tsv(args.labels)
    mean, per_point = silhouette(embedding, labels)
    if args.per_point_out:
        with open(args.per_point_out, "w", encoding="ascii") as fh:
            fh.write("id\tsilhouette\n")
            for seq_id, value in zip(embedding.ids, per_point):
                fh.write(f"{seq_id}\t{value:.17g}\n")
    print(f"silhouette: {mean:.6f}")
    _maybe_summary(args, {"stage": "silhouette", "mean": mean, "n": len(embedding.ids)})
    return 0


def cmd_heatmap(args) -> int:
    embedding = Embedding.read_tsv(args.emb)
    if args.dist:
        source = DistanceMatrix.load(args.dist)
    elif args.fasta:
        source = (parse_fasta(Path(args.fasta), Alphabet(args.alphabet)), _scheme_from(args))
    else:
        raise ValueError("either --dist or --fasta is required")
    grid = distance_heatmap(source, embedding, pairs=args.pairs, bins=args.bins, rng_seed=args.seed)
    grid.save_csv(args.out)
    print(f"pearson: {grid.pearson:.6f}")
    _maybe_summary(args, {
        "stage": "heatmap",
        "pairs": grid.pair_count,
        "pearson": grid.pearson,
        "out": args.out,
    })
    return 0


def cmd_oos(args) -> int:
    alphabet = Alphabet(args.alphabet)
    sset = parse_fasta(Path(args.input), alphabet)
    panel = ReferencePanel.load(args.panel)
    spec = NetworkSpec(panel.k, _parse_hidden(args.encoder_hidden), args.alpha, args.output_activation)
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        optimizer=args.optimizer,
        init_seed=args.init_seed,
        shuffle_seed=args.shuffle_seed,
    )
    report = oos_protocol(sset, panel, spec, cfg, args.clusters, args.holdout, args.seed, threads=args.threads)
    Path(args.report).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    print(report.to_text(), end="")
    return 0


def cmd_smacof(args) -> int:
    matrix = DistanceMatrix.load(args.dist)
    ids = None
    if args.fasta:
        ids = parse_fasta(Path(args.fasta), Alphabet(args.alphabet)).ids
    cfg = MdsConfig(args.dim, args.max_iter, args.eps, args.seed)
    embedding, history = smacof(matrix, cfg, ids=ids)
    embedding.write_tsv(args.out)
    if args.history_out:
        with open(args.history_out, "w", encoding="ascii") as fh:
            fh.write("iteration\tstress\n")
            for i, value in enumerate(history):
                fh.write(f"{i}\t{value:.17g}\n")
    print(f"initial stress: {history[0]:.6g}")
    print(f"final stress: {history[-1]:.6g}")
    _maybe_summary(args, {
        "stage": "smacof",
        "iterations": len(history) - 1,
        "initial_stress": history[0],
        "final_stress": history[-1],
        "out": args.out,
    })
    return 0


def _load_pipeline_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_ini(args.config) if args.config else PipelineConfig()
    for name in ("input", "workdir", "kind", "seed", "threads", "k", "clusters"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if not cfg.workdir:
        cfg.workdir = os.environ.get("SEQEMBED_WORKDIR", ".")
    cfg.resolve_seeds()
    return cfg


def _run_pipeline(cfg: PipelineConfig, arm: str, workdir: Path) -> dict:
    """Run one reduction arm end to end inside ``workdir``.

    Arms: (a) full pairwise matrix reduced by stress majorization;
    (b) one-hot encoding through the autoencoder; (c) reference-panel
    encoding through the autoencoder.
    """
    workdir.mkdir(parents=True, exist_ok=True)
    cfg.to_ini(workdir / "config.ini")  # echoed resolved config; replays the run
    alphabet = Alphabet(cfg.alphabet)
    sset = parse_fasta(Path(cfg.input), alphabet)
    scheme = cfg.scheme()
    summary: dict = {"arm": arm, "n_sequences": len(sset), "seed": cfg.seed}

    if arm == "a":
        matrix = pairwise_matrix(sset, scheme, threads=cfg.threads)
        matrix.save(workdir / "distances.swdm")
        summary["alignments"] = matrix.alignments
        summary["cells"] = matrix.cells
        mds_cfg = MdsConfig(cfg.mds_dim, cfg.mds_max_iter, cfg.mds_eps, cfg.mds_seed)
        embedding, history = smacof(matrix, mds_cfg, ids=sset.ids)
        summary["initial_stress"] = history[0]
        summary["final_stress"] = history[-1]
        heat_source: object = matrix
    else:
        if arm == "b":
            encoded = one_hot_encode(sset, alphabet, cfg.target_len)
        else:
            panel = sample_references(sset, cfg.k, cfg.panel_seed, scheme)
            panel.save(workdir / "panel.tsv")
            encoded = reference_encode(sset, panel, threads=cfg.threads)
            summary["panel_k"] = panel.k
            summary["alignments"] = len(sset) * panel.k
        encoded.save(workdir / "encoded.enc")
        spec = cfg.network_spec(encoded.dim)
        weights, history = train(encoded, spec, cfg.train_config(), on_batch=_epoch_logger(cfg.epochs))
        save_model_file(weights, workdir / "model.aemd")
        with open(workdir / "loss_history.tsv", "w", encoding="ascii") as fh:
            fh.write("epoch\tloss\n")
            for i, loss in enumerate(history):
                fh.write(f"{i}\t{loss:.17g}\n")
        summary["first_loss"] = history[0]
        summary["final_loss"] = history[-1]
        summary["epochs"] = len(history)
        embedding = embed(weights, encoded)
        heat_source = (sset, scheme)

    embedding.write_tsv(workdir / "embedding.tsv")
    result = kmeans(embedding, cfg.clusters, rng_seed=cfg.kmeans_seed)
    result.labels.write_tsv(workdir / "labels.tsv")
    _write_centroids(workdir / "centroids.tsv", result.centroids)
    sc_mean, _ = silhouette(embedding, result.labels)
    grid = distance_heatmap(
        heat_source, embedding, pairs=cfg.heatmap_pairs, bins=cfg.heatmap_bins, rng_seed=cfg.heatmap_seed
    )
    grid.save_csv(workdir / "heatmap.csv")
    summary["silhouette"] = sc_mean
    summary["pearson"] = grid.pearson
    summary["clusters"] = cfg.clusters
    return summary


def cmd_pipeline(args) -> int:
    cfg = _load_pipeline_config(args)
    workdir = Path(cfg.workdir)
    summary = _run_pipeline(cfg, args.arm, workdir)
    _write_summary(workdir / "run_summary.json", summary)
    print(f"silhouette: {summary['silhouette']:.6f}")
    print(f"pearson: {summary['pearson']:.6f}")
    return 0


def cmd_sweep(args) -> int:
    """Repeat the reference-panel arm over panel seeds for each K.

    Reports max/min/average silhouette per K, against k-means labels by
    default or caller-provided labels.
    """
    cfg = _load_pipeline_config(args)
    alphabet = Alphabet(cfg.alphabet)
    sset = parse_fasta(Path(cfg.input), alphabet)
    scheme = cfg.scheme()
    given = ClusterLabels.read_tsv(args.labels) if args.labels else None
    if given is not None and given.ids != sset.ids:
        raise ValueError("label ids do not match the input sequences")

    rows = []
    for k_refs in args.k_values:
        scores = []
        for repeat in range(args.repeats):
            panel = sample_references(sset, k_refs, cfg.panel_seed + repeat, scheme)
            encoded = reference_encode(sset, panel, threads=cfg.threads)
            spec = cfg.network_spec(encoded.dim)
            weights, _ = train(encoded, spec, cfg.train_config())
            embedding = embed(weights, encoded)
            if given is not None:
                labels: ClusterLabels = given
            else:
                labels = kmeans(embedding, cfg.clusters, rng_seed=cfg.kmeans_seed).labels
            sc_mean, _ = silhouette(embedding, labels)
            scores.append(sc_mean)
            logger.info("K=%d repeat %d: silhouette %.4f", k_refs, repeat, sc_mean)
        rows.append((k_refs, max(scores), min(scores), sum(scores) / len(scores)))

    lines = ["k\tsc_max\tsc_min\tsc_avg"]
    for k_refs, sc_max, sc_min, sc_avg in rows:
        lines.append(f"{k_refs}\t{sc_max:.6f}\t{sc_min:.6f}\t{sc_avg:.6f}")
    table = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(table)
    print(table, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqembed", description=__doc__)
    parser.add_argument("--version", action="version", version=f"seqembed {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a clustered synthetic dataset")
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--per-cluster", type=int, required=True)
    p.add_argument("--seed-len", type=int, required=True)
    p.add_argument("--mutation-rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output FASTA")
    p.add_argument("--labels-out", help="optional TSV of true cluster labels")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dedup", help="collapse duplicate sequences")
    p.add_argument("--input", required=True)
    p.add_argument("--alphabet", default="ATGC")
    p.add_argument("--out", required=True, help="unique sequences FASTA")
    p.add_argument("--recurrent-out", help="FASTA of sequences occurring more than once")
    p.add_argument("--multiplicity-out", help="TSV of id, count")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("distmat", help="full pairwise distance matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--alphabet", default="ATGC")
    _add_scheme_flags(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--max-bytes", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--csv-out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_distmat)

    p = sub.add_parser("sample-refs", help="sample a reference panel")
    p.add_argument("--input", required=True)
    p.add_argument("--alphabet", default="ATGC")
    _add_scheme_flags(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.set_defaults(func=cmd_sample_refs)

    p = sub.add_parser("encode", help="encode sequences to fixed-length vectors")
    p.add_argument("--input", required=True)
    p.add_argument("--alphabet", default="ATGC")
    p.add_argument("--kind", choices=("onehot", "ordinal", "reference"), required=True)
    p.add_argument("--target-len", type=int, default=None)
    p.add_argument("--panel", help="panel TSV (reference encoding)")
    p.add_argument("--refs", help="optional FASTA holding the panel sequences")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train the autoencoder on an encoded dataset")
    p.add_argument("--input", required=True, help="encoded dataset file")
    p.add_argument("--encoder-hidden", default="128,3")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--output-activation", choices=("linear", "sigmoid"), default="linear")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--shuffle-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--history-out", help="per-epoch loss TSV")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="encoder-only embedding of an encoded dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="encoded dataset file")
    p.add_argument("--out", required=True, help="embedding TSV")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("kmeans", help="cluster an embedding")
    p.add_argument("--input", required=True, help="embedding TSV")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--init-centroids", help="TSV of fixed initial centers")
    p.add_argument("--out", required=True, help="labels TSV")
    p.add_argument("--centroids-out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_kmeans)

    p = sub.add_parser("silhouette", help="silhouette score of an embedding under labels")
    p.add_argument("--input", required=True, help="embedding TSV")
    p.add_argument("--labels", required=True, help="labels TSV")
    p.add_argument("--per-point-out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_silhouette)

    p = sub.add_parser("heatmap", help="input vs embedded distance histogram")
    p.add_argument("--emb", required=True, help="embedding TSV")
    p.add_argument("--dist", help="distance matrix file")
    p.add_argument("--fasta", help="sequences to align on the fly instead of --dist")
    p.add_argument("--alphabet", default="ATGC")
    _add_scheme_flags(p)
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="histogram CSV (a .meta.json sidecar is added)")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("oos", help="held-out-point consistency protocol")
    p.add_argument("--input", required=True)
    p.add_argument("--alphabet", default="ATGC")
    p.add_argument("--panel", required=True)
    p.add_argument("--encoder-hidden", default="128,3")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--output-activation", choices=("linear", "sigmoid"), default="linear")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--shuffle-seed", type=int, default=0)
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--holdout", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report", required=True, help="JSON report path")
    p.set_defaults(func=cmd_oos)

    p = sub.add_parser("smacof", help="stress-majorization embedding of a distance matrix")
    p.add_argument("--dist", required=True)
    p.add_argument("--fasta", help="optional FASTA supplying row ids")
    p.add_argument("--alphabet", default="ATGC")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="embedding TSV")
    p.add_argument("--history-out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_smacof)

    p = sub.add_parser("pipeline", help="run one full reduction arm from a config")
    p.add_argument("--config", help="INI config file")
    p.add_argument("--arm", choices=("a", "b", "c"), default="c")
    p.add_argument("--input")
    p.add_argument("--workdir")
    p.add_argument("--kind")
    p.add_argument("--k", type=int)
    p.add_argument("--clusters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("sweep", help="repeat the reference arm over panel seeds per K")
    p.add_argument("--config", help="INI config file")
    p.add_argument("--k-values", type=lambda s: [int(v) for v in s.split(",")], required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--labels", help="score against these labels instead of k-means")
    p.add_argument("--input")
    p.add_argument("--workdir")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--clusters", type=int)
    p.add_argument("--out", help="write the summary table TSV here as well")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (SeqEmbedError, ValueError, LookupError, OSError) as exc:
        print(f"error[{args.command}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
