"""Fixed-length numeric encodings of sequence sets.

Three encodings are provided:

* one-hot: each residue becomes an alphabet-width indicator block,
  zero-padded to a common length (D = target_len * alphabet size);
* ordinal: each residue becomes a scalar in (0, 1], zero-padded
  (D = target_len);
* reference panel: each sequence becomes its vector of normalized
  alignment distances to K sampled reference sequences (D = K).

All features are stored as float32 in [0, 1].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .alignment import DEFAULT_SCHEME, ScoringScheme, rect_matrix
from .errors import EncodingError, FormatError
from .sequences import DNA, Alphabet, SequenceSet
from .validation import as_sequence_set

_ENC_MAGIC = b"SWDM"  # matrix payload reuses the distance-matrix layout


@dataclass
class EncodingMeta:
    kind: str  # onehot | ordinal | reference
    params: dict = field(default_factory=dict)


@dataclass
class EncodedDataset:
    """An N x D feature matrix with row ids and its encoding descriptor."""

    ids: list[str]
    features: np.ndarray
    meta: EncodingMeta

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float32)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if len(self.ids) != self.features.shape[0]:
            raise ValueError(
                f"{len(self.ids)} ids do not match {self.features.shape[0]} feature rows"
            )
        if self.features.size and (self.features.min() < 0.0 or self.features.max() > 1.0):
            raise ValueError("encoded features must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def save(self, path: Union[str, Path]) -> None:
        """Text header lines, then the binary matrix block.

        Line 1 declares kind/dimensions/parameters, line 2 carries the row
        ids; the payload reuses the distance-matrix layout (16-byte header
        plus row-major little-endian float32).
        """
        params = " ".join(f"{k}={v}" for k, v in self.meta.params.items())
        header = f"#ENC kind={self.meta.kind} d={self.dim} n={self.n}"
        if params:
            header += " " + params
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii") + b"\n")
            fh.write(("#ids " + "\t".join(self.ids)).encode("ascii") + b"\n")
            fh.write(_ENC_MAGIC)
            fh.write(struct.pack("<III", self.n, self.dim, 0))
            fh.write(self.features.astype("<f4", copy=False).tobytes())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "EncodedDataset":
        with open(path, "rb") as fh:
            header = fh.readline().decode("ascii").strip()
            ids_line = fh.readline().decode("ascii").rstrip("\n")
            blob = fh.read()
        if not header.startswith("#ENC "):
            raise FormatError(f"{path}: missing #ENC header")
        fields = dict(part.split("=", 1) for part in header[5:].split() if "=" in part)
        if not ids_line.startswith("#ids "):
            raise FormatError(f"{path}: missing #ids line")
        ids = ids_line[5:].split("\t")
        if len(blob) < 16 or blob[:4] != _ENC_MAGIC:
            raise FormatError(f"{path}: missing matrix block")
        rows, cols, _ = struct.unpack("<III", blob[4:16])
        expected = 16 + rows * cols * 4
        if len(blob) != expected:
            raise FormatError(f"{path}: truncated matrix block")
        features = np.frombuffer(blob[16:], dtype="<f4").reshape(rows, cols).copy()
        kind = fields.pop("kind", "")
        fields.pop("d", None)
        fields.pop("n", None)
        return cls(ids, features, EncodingMeta(kind, fields))


@dataclass
class ReferencePanel:
    """K reference sequence ids, the seed that sampled them, and the scheme."""

    ref_ids: list[str]
    rng_seed: int
    scheme: ScoringScheme = DEFAULT_SCHEME

    def __post_init__(self):
        if not self.ref_ids:
            raise ValueError("reference panel must contain at least one id")
        if len(set(self.ref_ids)) != len(self.ref_ids):
            raise ValueError("reference panel ids must be unique")

    @property
    def k(self) -> int:
        return len(self.ref_ids)

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(f"#seed\t{self.rng_seed}\n")
            fh.write(
                f"#scheme\tmatch={self.scheme.match}\t"
                f"mismatch={self.scheme.mismatch}\tgap={self.scheme.gap}\n"
            )
            for ref_id in self.ref_ids:
                fh.write(ref_id + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ReferencePanel":
        seed = None
        scheme = DEFAULT_SCHEME
        ids: list[str] = []
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#seed\t"):
                    seed = int(line.split("\t")[1])
                elif line.startswith("#scheme\t"):
                    kv = dict(p.split("=", 1) for p in line.split("\t")[1:])
                    scheme = ScoringScheme(int(kv["match"]), int(kv["mismatch"]), int(kv["gap"]))
                else:
                    ids.append(line)
        if seed is None:
            raise FormatError(f"{path}: missing #seed line")
        return cls(ids, seed, scheme)


def default_slots(alphabet: Alphabet) -> dict[str, int]:
    """Block layout for one-hot encoding: the first symbol fills the last slot.

    For ``ATGC`` this yields A=[0,0,0,1], T=[0,0,1,0], G=[0,1,0,0],
    C=[1,0,0,0].
    """
    size = len(alphabet)
    return {c: size - 1 - i for i, c in enumerate(alphabet.symbols)}


def default_ordinal_values(alphabet: Alphabet) -> dict[str, float]:
    """Evenly spaced scalars in (0, 1]: A=0.25, T=0.5, G=0.75, C=1.0 for ATGC."""
    size = len(alphabet)
    return {c: (i + 1) / size for i, c in enumerate(alphabet.symbols)}


def _resolve_target_len(sset: SequenceSet, target_len: int | None) -> int:
    if target_len is None:
        return sset.max_len
    longest = max(sset, key=len)
    if target_len < len(longest):
        raise EncodingError(
            f"target_len {target_len} is shorter than sequence {longest.id!r} "
            f"of length {len(longest)}"
        )
    return target_len


def one_hot_encode(
    sset: SequenceSet,
    alphabet: Alphabet = DNA,
    target_len: int | None = None,
    slots: dict[str, int] | None = None,
) -> EncodedDataset:
    """Indicator-block encoding, zero-padded beyond each sequence's length.

    The residue at position p sets one bit inside the block at offset
    p * C, so D = target_len * C and each row sums to the sequence length.
    ``target_len`` defaults to the longest sequence in the set.
    """
    length = _resolve_target_len(sset, target_len)
    slots = default_slots(alphabet) if slots is None else slots
    size = len(alphabet)
    features = np.zeros((len(sset), length * size), dtype=np.float32)
    for row, seq in enumerate(sset):
        for pos, ch in enumerate(seq.residues):
            if ch not in slots:
                raise EncodingError(f"sequence {seq.id!r}: no one-hot slot for {ch!r}")
            features[row, pos * size + slots[ch]] = 1.0
    meta = EncodingMeta(
        "onehot",
        {"alphabet": alphabet.symbols, "target_len": length},
    )
    return EncodedDataset(sset.ids, features, meta)


def ordinal_encode(
    sset: SequenceSet,
    values: dict[str, float] | None = None,
    target_len: int | None = None,
    alphabet: Alphabet = DNA,
) -> EncodedDataset:
    """Scalar-per-residue encoding with zero padding (D = target_len).

    Included to let the evaluation suite demonstrate its known weakness:
    networks fed ordinal codes weight high-valued symbols more heavily.
    """
    length = _resolve_target_len(sset, target_len)
    values = default_ordinal_values(alphabet) if values is None else values
    missing = [c for c in alphabet.symbols if c not in values]
    if missing:
        raise EncodingError(f"ordinal value map misses alphabet symbols {missing}")
    features = np.zeros((len(sset), length), dtype=np.float32)
    for row, seq in enumerate(sset):
        for pos, ch in enumerate(seq.residues):
            try:
                features[row, pos] = values[ch]
            except KeyError:
                raise EncodingError(f"sequence {seq.id!r}: no ordinal value for {ch!r}") from None
    meta = EncodingMeta("ordinal", {"alphabet": alphabet.symbols, "target_len": length})
    return EncodedDataset(sset.ids, features, meta)


def sample_references(
    sset: SequenceSet,
    k: int,
    rng_seed: int,
    scheme: ScoringScheme = DEFAULT_SCHEME,
) -> ReferencePanel:
    """Sample K reference ids uniformly without replacement."""
    n = len(sset)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(n, size=k, replace=False)
    ids = [sset[int(i)].id for i in idx]
    return ReferencePanel(ids, rng_seed, scheme)


def reference_encode(
    sset: SequenceSet,
    panel: ReferencePanel,
    scheme: ScoringScheme | None = None,
    threads: int = 1,
    refs: SequenceSet | None = None,
) -> EncodedDataset:
    """Encode each sequence as its distances to the panel (D = K).

    Panel ids are resolved against ``refs`` when given, else against
    ``sset`` itself; new data is encoded against the same frozen panel,
    which is what makes held-out points embeddable later.
    """
    source = refs if refs is not None else sset
    panel_seqs = SequenceSet(source.get(ref_id) for ref_id in panel.ref_ids)
    scheme = panel.scheme if scheme is None else scheme
    matrix = rect_matrix(sset, panel_seqs, scheme, threads=threads)
    meta = EncodingMeta(
        "reference",
        {
            "k": panel.k,
            "panel_seed": panel.rng_seed,
            "match": scheme.match,
            "mismatch": scheme.mismatch,
            "gap": scheme.gap,
        },
    )
    return EncodedDataset(sset.ids, matrix.values, meta)


class OneHotSequenceEncoder(BaseEstimator, TransformerMixin):
    """Transformer wrapper over :func:`one_hot_encode`.

    Parameters
    ----------
    alphabet : Alphabet
    target_len : int or None
        Padding target; fit() learns the longest training sequence when None.
    """

    def __init__(self, alphabet: Alphabet = DNA, target_len: int | None = None):
        self.alphabet = alphabet
        self.target_len = target_len

    def fit(self, X, y=None):
        sset = as_sequence_set(X)
        self.target_len_ = _resolve_target_len(sset, self.target_len)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "target_len_"):
            raise NotFittedError("OneHotSequenceEncoder is not fitted")
        return one_hot_encode(as_sequence_set(X), self.alphabet, self.target_len_).features


class OrdinalSequenceEncoder(BaseEstimator, TransformerMixin):
    """Transformer wrapper over :func:`ordinal_encode`."""

    def __init__(
        self,
        alphabet: Alphabet = DNA,
        target_len: int | None = None,
        values: dict[str, float] | None = None,
    ):
        self.alphabet = alphabet
        self.target_len = target_len
        self.values = values

    def fit(self, X, y=None):
        sset = as_sequence_set(X)
        self.target_len_ = _resolve_target_len(sset, self.target_len)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "target_len_"):
            raise NotFittedError("OrdinalSequenceEncoder is not fitted")
        return ordinal_encode(
            as_sequence_set(X), self.values, self.target_len_, self.alphabet
        ).features


class ReferencePanelEncoder(BaseEstimator, TransformerMixin):
    """Transformer that samples a reference panel at fit time.

    fit() draws k references from the training set and freezes them
    (``panel_`` and ``refs_``); transform() maps any sequence set, including
    unseen data, to distances against that frozen panel.
    """

    def __init__(
        self,
        k: int = 100,
        random_state: int = 0,
        scheme: ScoringScheme = DEFAULT_SCHEME,
        threads: int = 1,
    ):
        self.k = k
        self.random_state = random_state
        self.scheme = scheme
        self.threads = threads

    def fit(self, X, y=None):
        sset = as_sequence_set(X)
        self.panel_ = sample_references(sset, self.k, self.random_state, self.scheme)
        self.refs_ = SequenceSet(sset.get(ref_id) for ref_id in self.panel_.ref_ids)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "panel_"):
            raise NotFittedError("ReferencePanelEncoder is not fitted")
        return reference_encode(
            as_sequence_set(X), self.panel_, threads=self.threads, refs=self.refs_
        ).features
