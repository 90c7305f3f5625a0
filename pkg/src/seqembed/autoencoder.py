"""Fully-connected autoencoder with explicit forward/backward passes.

The network mirrors its encoder: input D, the configured encoder widths
down to a bottleneck of d units, then the reverse widths back up to D.
Hidden layers use the rectifier, the bottleneck a leaky rectifier, and the
output layer is linear by default. Training minimizes mean squared
reconstruction error; embedding runs the encoder half only, which is what
lets points that never entered training be placed in the same space by a
single forward pass.

All training arithmetic is float64 so analytic gradients can be checked
against finite differences tightly.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .encoding import EncodedDataset
from .errors import FormatError, NumericError, TrainingError
from .validation import check_features

_MODEL_MAGIC = b"AEMD"
_MODEL_VERSION = 1
_OUTPUT_ACTIVATIONS = ("linear", "sigmoid")


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths and activation parameters of a mirrored autoencoder.

    ``encoder_hidden`` lists the encoder layer widths, the last entry being
    the bottleneck d. A spec of input_dim=50, encoder_hidden=(128, 3) means
    the full network 50-128-3-128-50.
    """

    input_dim: int
    encoder_hidden: tuple[int, ...] = (128, 3)
    alpha: float = 0.01
    output_activation: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "encoder_hidden", tuple(int(w) for w in self.encoder_hidden))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if not self.encoder_hidden or any(w < 1 for w in self.encoder_hidden):
            raise ValueError(f"encoder widths must all be >= 1, got {self.encoder_hidden}")
        if self.output_activation not in _OUTPUT_ACTIVATIONS:
            raise ValueError(f"output_activation must be one of {_OUTPUT_ACTIVATIONS}")

    @property
    def bottleneck_dim(self) -> int:
        return self.encoder_hidden[-1]

    @property
    def layer_widths(self) -> list[int]:
        """Unit counts from input to output, decoder mirroring the encoder."""
        decoder = list(reversed(self.encoder_hidden[:-1]))
        return [self.input_dim, *self.encoder_hidden, *decoder, self.input_dim]

    @property
    def bottleneck_layer(self) -> int:
        """Index of the weight layer whose output is the bottleneck."""
        return len(self.encoder_hidden) - 1

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1


@dataclass
class ModelWeights:
    """Per-layer (out x in) weight matrices and bias vectors, float64."""

    spec: NetworkSpec
    rng_seed: int
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        widths = self.spec.layer_widths
        if len(self.weights) != self.spec.n_layers or len(self.biases) != self.spec.n_layers:
            raise ValueError("weight/bias count does not match the network spec")
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (widths[layer + 1], widths[layer])
            if w.shape != expected or b.shape != (widths[layer + 1],):
                raise ValueError(f"layer {layer}: shapes {w.shape}/{b.shape} != spec {expected}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError(f"layer {layer}: non-finite parameters")

    def copy(self) -> "ModelWeights":
        return ModelWeights(
            self.spec,
            self.rng_seed,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModelWeights)
            and self.spec == other.spec
            and self.rng_seed == other.rng_seed
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases))
        )


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 256
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    momentum: float = 0.0
    init_seed: int = 0
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")


@dataclass
class Embedding:
    """Low-dimensional coordinates, one row per id."""

    ids: list[str]
    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if self.coords.ndim != 2:
            raise ValueError(f"coords must be 2-D, got shape {self.coords.shape}")
        if len(self.ids) != self.coords.shape[0]:
            raise ValueError(f"{len(self.ids)} ids do not match {self.coords.shape[0]} rows")
        if not np.isfinite(self.coords).all():
            raise ValueError("embedding coordinates must be finite")

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def write_tsv(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("id\t" + "\t".join(f"x{i + 1}" for i in range(self.dim)) + "\n")
            for seq_id, row in zip(self.ids, self.coords):
                fh.write(seq_id + "\t" + "\t".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def read_tsv(cls, path: Union[str, Path]) -> "Embedding":
        ids: list[str] = []
        rows: list[list[float]] = []
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline()
            if not header.startswith("id\t"):
                raise FormatError(f"{path}: missing embedding header")
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                ids.append(parts[0])
                rows.append([float(v) for v in parts[1:]])
        return cls(ids, np.array(rows, dtype=np.float64))


def init_weights(spec: NetworkSpec, rng_seed: int) -> ModelWeights:
    """Fan-in-scaled uniform weights (bound sqrt(6/fan_in)), zero biases."""
    rng = np.random.default_rng(rng_seed)
    widths = spec.layer_widths
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return ModelWeights(spec, rng_seed, weights, biases)


def _forward_cached(w: ModelWeights, x: np.ndarray, check: bool = False) -> list[np.ndarray]:
    """Post-activation of every layer, index 0 being the input batch."""
    spec = w.spec
    acts = [x]
    h = x
    for layer in range(spec.n_layers):
        z = h @ w.weights[layer].T + w.biases[layer]
        if layer == spec.n_layers - 1:
            h = 1.0 / (1.0 + np.exp(-z)) if spec.output_activation == "sigmoid" else z
        elif layer == spec.bottleneck_layer:
            h = np.where(z > 0.0, z, spec.alpha * z)
        else:
            h = np.maximum(z, 0.0)
        if check and not np.isfinite(h).all():
            raise NumericError(f"non-finite activations in layer {layer}", layer=layer)
        acts.append(h)
    return acts


def _check_batch(w: ModelWeights, x) -> np.ndarray:
    x = check_features(x, "batch")
    if x.shape[1] != w.spec.input_dim:
        raise ValueError(f"batch width {x.shape[1]} != network input_dim {w.spec.input_dim}")
    return x


def forward(w: ModelWeights, x) -> tuple[np.ndarray, np.ndarray]:
    """Full pass over a batch; returns (reconstruction, bottleneck)."""
    x = _check_batch(w, x)
    acts = _forward_cached(w, x)
    return acts[-1], acts[w.spec.bottleneck_layer + 1]


def loss_and_grads(w: ModelWeights, x) -> tuple[float, Gradients]:
    """Mean squared reconstruction error and its exact analytic gradients.

    The loss averages over both batch rows and feature dimensions, so
    gradients are directly comparable across batch sizes.
    """
    x = _check_batch(w, x)
    spec = w.spec
    acts = _forward_cached(w, x, check=True)
    out = acts[-1]
    resid = out - x
    n_rows, n_dims = x.shape
    loss = float((resid * resid).mean())

    g = 2.0 * resid / (n_rows * n_dims)  # dL/d(output activation)
    if spec.output_activation == "sigmoid":
        g = g * out * (1.0 - out)
    grad_w: list[np.ndarray] = [np.empty(0)] * spec.n_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * spec.n_layers
    for layer in range(spec.n_layers - 1, -1, -1):
        grad_w[layer] = g.T @ acts[layer]
        grad_b[layer] = g.sum(axis=0)
        if layer > 0:
            g = g @ w.weights[layer]
            post = acts[layer]  # post-activation of layer - 1 reveals the sign of z
            if layer - 1 == spec.bottleneck_layer:
                g = g * np.where(post > 0.0, 1.0, spec.alpha)
            else:
                g = g * (post > 0.0)
    return loss, Gradients(grad_w, grad_b)


class _Adam:
    def __init__(self, params: list[np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        cfg = self.cfg
        self.t += 1
        bc1 = 1.0 - cfg.beta1**self.t
        bc2 = 1.0 - cfg.beta2**self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * (g * g)
            p -= cfg.learning_rate * (self.m[i] / bc1) / (np.sqrt(self.v[i] / bc2) + cfg.eps)


class _Sgd:
    def __init__(self, params: list[np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.buf = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        cfg = self.cfg
        for i, (p, g) in enumerate(zip(params, grads)):
            self.buf[i] = cfg.momentum * self.buf[i] + g
            p -= cfg.learning_rate * self.buf[i]


def train(
    data: Union[EncodedDataset, np.ndarray],
    spec: NetworkSpec,
    cfg: TrainConfig,
    on_batch: Callable[[int, int, float], None] | None = None,
) -> tuple[ModelWeights, list[float]]:
    """Mini-batch reconstruction training; returns weights and per-epoch loss.

    Each epoch shuffles row order with a stream seeded by
    ``cfg.shuffle_seed`` and applies one optimizer update per mini-batch.
    The recorded epoch loss is the sample-weighted mean of the pre-update
    batch losses. Deterministic for fixed (data, spec, cfg).
    """
    x = data.features if isinstance(data, EncodedDataset) else data
    x = check_features(x, "training data")
    if x.shape[1] != spec.input_dim:
        raise ValueError(f"data dimension {x.shape[1]} != spec input_dim {spec.input_dim}")

    w = init_weights(spec, cfg.init_seed)
    params = w.weights + w.biases
    opt = _Adam(params, cfg) if cfg.optimizer == "adam" else _Sgd(params, cfg)
    rng = np.random.default_rng(cfg.shuffle_seed)
    n = x.shape[0]

    history: list[float] = []
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        epoch_sq_sum = 0.0
        for batch_index, lo in enumerate(range(0, n, cfg.batch_size)):
            batch = x[perm[lo : lo + cfg.batch_size]]
            try:
                loss, grads = loss_and_grads(w, batch)
            except NumericError as exc:
                raise TrainingError(
                    f"training diverged at epoch {epoch}: {exc}", epoch=epoch
                ) from exc
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}", epoch=epoch)
            epoch_sq_sum += loss * batch.shape[0]
            opt.step(params, grads.weights + grads.biases)
            if on_batch is not None:
                on_batch(epoch, batch_index, loss)
        history.append(epoch_sq_sum / n)
    return w, history


def encode_features(w: ModelWeights, x) -> np.ndarray:
    """Encoder-only forward pass: rows of bottleneck coordinates.

    Rows are evaluated one at a time so a coordinate depends only on its
    own input row, never on how the caller batched the data; embedding a
    point alone or inside any batch gives bit-identical output.
    """
    x = _check_batch(w, x)
    spec = w.spec
    out = np.empty((x.shape[0], spec.bottleneck_dim))
    for row in range(x.shape[0]):
        h = x[row]
        for layer in range(spec.bottleneck_layer + 1):
            z = w.weights[layer] @ h + w.biases[layer]
            if layer == spec.bottleneck_layer:
                h = np.where(z > 0.0, z, spec.alpha * z)
            else:
                h = np.maximum(z, 0.0)
        out[row] = h
    return out


def embed(w: ModelWeights, data: EncodedDataset) -> Embedding:
    """Embed a dataset through the encoder half, preserving ids and order.

    A pure function of the encoder weights and the input rows, so held-out
    or newly arrived points embed exactly like training points.
    """
    return Embedding(list(data.ids), encode_features(w, data.features))


def save_model(w: ModelWeights) -> bytes:
    """Serialize spec, seed, and parameters; little-endian with a CRC32 tail."""
    spec = w.spec
    parts = [struct.pack("<I", _MODEL_VERSION)]
    parts.append(struct.pack("<I", spec.input_dim))
    parts.append(struct.pack("<I", len(spec.encoder_hidden)))
    parts.append(struct.pack(f"<{len(spec.encoder_hidden)}I", *spec.encoder_hidden))
    parts.append(struct.pack("<d", spec.alpha))
    parts.append(struct.pack("<B", _OUTPUT_ACTIVATIONS.index(spec.output_activation)))
    parts.append(struct.pack("<q", w.rng_seed))
    for weight, bias in zip(w.weights, w.biases):
        parts.append(weight.astype("<f8", copy=False).tobytes())
        parts.append(bias.astype("<f8", copy=False).tobytes())
    payload = b"".join(parts)
    return _MODEL_MAGIC + payload + struct.pack("<I", zlib.crc32(payload))


def load_model(blob: bytes) -> ModelWeights:
    if len(blob) < 8 or blob[:4] != _MODEL_MAGIC:
        raise FormatError("not an autoencoder model blob")
    payload, (crc,) = blob[4:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) != crc:
        raise FormatError("model checksum mismatch (truncated or corrupt)")
    try:
        off = 0

        def take(fmt: str):
            nonlocal off
            size = struct.calcsize(fmt)
            values = struct.unpack_from(fmt, payload, off)
            off += size
            return values

        (version,) = take("<I")
        if version != _MODEL_VERSION:
            raise FormatError(f"unsupported model version {version}")
        (input_dim,) = take("<I")
        (n_hidden,) = take("<I")
        encoder_hidden = take(f"<{n_hidden}I")
        (alpha,) = take("<d")
        (act_tag,) = take("<B")
        (rng_seed,) = take("<q")
        spec = NetworkSpec(input_dim, encoder_hidden, alpha, _OUTPUT_ACTIVATIONS[act_tag])
        widths = spec.layer_widths
        weights, biases = [], []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            w_vals = np.frombuffer(payload, "<f8", count=fan_out * fan_in, offset=off)
            off += fan_out * fan_in * 8
            b_vals = np.frombuffer(payload, "<f8", count=fan_out, offset=off)
            off += fan_out * 8
            weights.append(w_vals.reshape(fan_out, fan_in).copy())
            biases.append(b_vals.copy())
        if off != len(payload):
            raise FormatError("model payload has trailing bytes")
    except (struct.error, ValueError, IndexError) as exc:
        raise FormatError(f"malformed model blob: {exc}") from None
    return ModelWeights(spec, rng_seed, weights, biases)


def save_model_file(w: ModelWeights, path: Union[str, Path]) -> None:
    Path(path).write_bytes(save_model(w))


def load_model_file(path: Union[str, Path]) -> ModelWeights:
    return load_model(Path(path).read_bytes())


class AutoencoderEmbedder(BaseEstimator, TransformerMixin):
    """Dimension-reducing estimator: fit() trains, transform() embeds.

    Parameters
    ----------
    encoder_hidden : tuple of int
        Encoder layer widths ending in the bottleneck, e.g. (128, 3).
    epochs, batch_size, learning_rate, optimizer : training knobs
        See :class:`TrainConfig` for defaults.
    init_seed, shuffle_seed : int
        Seeds for weight initialization and epoch shuffling; fixed seeds
        make fit() fully reproducible.
    """

    def __init__(
        self,
        encoder_hidden: tuple[int, ...] = (128, 3),
        alpha: float = 0.01,
        output_activation: str = "linear",
        epochs: int = 100,
        batch_size: int = 256,
        learning_rate: float = 1e-3,
        optimizer: str = "adam",
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        momentum: float = 0.0,
        init_seed: int = 0,
        shuffle_seed: int = 0,
    ):
        self.encoder_hidden = encoder_hidden
        self.alpha = alpha
        self.output_activation = output_activation
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.momentum = momentum
        self.init_seed = init_seed
        self.shuffle_seed = shuffle_seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            optimizer=self.optimizer,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            momentum=self.momentum,
            init_seed=self.init_seed,
            shuffle_seed=self.shuffle_seed,
        )

    def fit(self, X, y=None):
        X = check_features(X)
        spec = NetworkSpec(
            X.shape[1], tuple(self.encoder_hidden), self.alpha, self.output_activation
        )
        self.weights_, self.history_ = train(X, spec, self._config())
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "weights_"):
            raise NotFittedError("AutoencoderEmbedder is not fitted")
        return encode_features(self.weights_, X)
