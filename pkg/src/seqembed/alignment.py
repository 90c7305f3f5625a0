"""Smith-Waterman local alignment scores and normalized pairwise distances.

The distance between two sequences is ``1 - 2*S(a,b) / (S(a,a) + S(b,b))``
where ``S`` is the best local-alignment score. Self-alignment of a sequence
of length ``L`` scores exactly ``match * L``, so the denominator reduces to
``match * (len(a) + len(b))``. The distance is 0 for identical sequences,
1 for pairs with no positive-scoring local alignment, and always in [0, 1].
"""

from __future__ import annotations

import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from numba import njit

from .errors import CapacityError, FormatError
from .sequences import Sequence, SequenceSet

logger = logging.getLogger(__name__)

_MAGIC = b"SWDM"
_FLAG_SYMMETRIC = 0x1
_CSV_LIMIT = 2000


@dataclass(frozen=True)
class ScoringScheme:
    """Linear-gap alignment scores: positive match, non-positive mismatch/gap."""

    match: int = 2
    mismatch: int = -1
    gap: int = -2

    def __post_init__(self):
        if self.match <= 0:
            raise ValueError(f"match score must be > 0, got {self.match}")
        if self.mismatch > 0:
            raise ValueError(f"mismatch score must be <= 0, got {self.mismatch}")
        if self.gap > 0:
            raise ValueError(f"gap score must be <= 0, got {self.gap}")


DEFAULT_SCHEME = ScoringScheme()


@dataclass
class DistanceMatrix:
    """Dense matrix of normalized alignment distances, float32 row-major.

    ``alignments`` and ``cells`` record how many pairwise alignments and
    dynamic-programming cells produced the matrix, when it was computed
    rather than loaded.
    """

    values: np.ndarray
    symmetric: bool
    alignments: int | None = None
    cells: int | None = None

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError(f"distance matrix must be 2-D, got shape {self.values.shape}")
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ValueError("distances must lie in [0, 1]")
        if self.symmetric:
            n, m = self.values.shape
            if n != m:
                raise ValueError(f"symmetric matrix must be square, got {self.values.shape}")
            if not np.array_equal(self.values, self.values.T):
                raise ValueError("matrix marked symmetric but values differ from transpose")
            if np.any(np.diagonal(self.values) != 0.0):
                raise ValueError("symmetric distance matrix must have a zero diagonal")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def save(self, path: Union[str, Path]) -> None:
        """Write the 16-byte header (magic, rows, cols, flags) plus payload."""
        rows, cols = self.values.shape
        flags = _FLAG_SYMMETRIC if self.symmetric else 0
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<III", rows, cols, flags))
            fh.write(self.values.astype("<f4", copy=False).tobytes())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DistanceMatrix":
        with open(path, "rb") as fh:
            header = fh.read(16)
            if len(header) != 16 or header[:4] != _MAGIC:
                raise FormatError(f"{path}: not a distance-matrix file")
            rows, cols, flags = struct.unpack("<III", header[4:])
            payload = fh.read()
        expected = rows * cols * 4
        if len(payload) != expected:
            raise FormatError(
                f"{path}: truncated payload, expected {expected} bytes, got {len(payload)}"
            )
        values = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
        return cls(values.copy(), symmetric=bool(flags & _FLAG_SYMMETRIC))

    def to_csv(self, path: Union[str, Path]) -> None:
        rows, cols = self.values.shape
        if rows > _CSV_LIMIT or cols > _CSV_LIMIT:
            raise ValueError(
                f"CSV export limited to {_CSV_LIMIT}x{_CSV_LIMIT}, got {rows}x{cols}"
            )
        np.savetxt(path, self.values, fmt="%.8g", delimiter=",")


@njit(cache=True, nogil=True)
def _sw_score_kernel(a, b, match, mismatch, gap):  # pragma: no cover - compiled
    m = a.shape[0]
    n = b.shape[0]
    prev = np.zeros(n + 1, np.int64)
    curr = np.zeros(n + 1, np.int64)
    best = 0
    for i in range(m):
        ai = a[i]
        curr[0] = 0
        for j in range(n):
            s = match if ai == b[j] else mismatch
            h = prev[j] + s
            if prev[j + 1] + gap > h:
                h = prev[j + 1] + gap
            if curr[j] + gap > h:
                h = curr[j] + gap
            if h < 0:
                h = 0
            curr[j + 1] = h
            if h > best:
                best = h
        tmp = prev
        prev = curr
        curr = tmp
    return best


@njit(cache=True, nogil=True)
def _tri_block_kernel(data, starts, lens, row0, row1, match, mismatch, gap, out):  # pragma: no cover
    # Rows [row0, row1) of the lower triangle; the mirror cell is written too,
    # so every matrix cell has exactly one writer across blocks.
    maxn = 0
    for j in range(row1):
        if lens[j] > maxn:
            maxn = lens[j]
    prev = np.empty(maxn + 1, np.int64)
    curr = np.empty(maxn + 1, np.int64)
    cells = 0
    for i in range(row0, row1):
        a0 = starts[i]
        m = lens[i]
        for j in range(i):
            b0 = starts[j]
            n = lens[j]
            for q in range(n + 1):
                prev[q] = 0
            best = 0
            for p in range(m):
                ap = data[a0 + p]
                curr[0] = 0
                for q in range(n):
                    s = match if ap == data[b0 + q] else mismatch
                    h = prev[q] + s
                    if prev[q + 1] + gap > h:
                        h = prev[q + 1] + gap
                    if curr[q] + gap > h:
                        h = curr[q] + gap
                    if h < 0:
                        h = 0
                    curr[q + 1] = h
                    if h > best:
                        best = h
                tmp = prev
                prev = curr
                curr = tmp
            d = np.float32(1.0 - 2.0 * best / (match * (m + n)))
            out[i, j] = d
            out[j, i] = d
            cells += m * n
    return cells


@njit(cache=True, nogil=True)
def _rect_block_kernel(
    data_a, starts_a, lens_a, data_b, starts_b, lens_b, row0, row1, match, mismatch, gap, out
):  # pragma: no cover - compiled
    maxn = 0
    for j in range(lens_b.shape[0]):
        if lens_b[j] > maxn:
            maxn = lens_b[j]
    prev = np.empty(maxn + 1, np.int64)
    curr = np.empty(maxn + 1, np.int64)
    cells = 0
    for i in range(row0, row1):
        a0 = starts_a[i]
        m = lens_a[i]
        for j in range(lens_b.shape[0]):
            b0 = starts_b[j]
            n = lens_b[j]
            for q in range(n + 1):
                prev[q] = 0
            best = 0
            for p in range(m):
                ap = data_a[a0 + p]
                curr[0] = 0
                for q in range(n):
                    s = match if ap == data_b[b0 + q] else mismatch
                    h = prev[q] + s
                    if prev[q + 1] + gap > h:
                        h = prev[q + 1] + gap
                    if curr[q] + gap > h:
                        h = curr[q] + gap
                    if h < 0:
                        h = 0
                    curr[q + 1] = h
                    if h > best:
                        best = h
                tmp = prev
                prev = curr
                curr = tmp
            out[i, j] = np.float32(1.0 - 2.0 * best / (match * (m + n)))
            cells += m * n
    return cells


def _as_bytes(seq: Union[Sequence, str]) -> np.ndarray:
    residues = seq.residues if isinstance(seq, Sequence) else seq
    return np.frombuffer(residues.encode("ascii"), dtype=np.uint8)


def _pack(sset: SequenceSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lens = np.array([len(s) for s in sset], dtype=np.int64)
    starts = np.zeros(len(lens), dtype=np.int64)
    np.cumsum(lens[:-1], out=starts[1:])
    data = np.frombuffer("".join(s.residues for s in sset).encode("ascii"), dtype=np.uint8)
    return data, starts, lens


def sw_score(a: Union[Sequence, str], b: Union[Sequence, str], scheme: ScoringScheme = DEFAULT_SCHEME) -> int:
    """Best local-alignment score between two sequences.

    Dynamic programming over the full cell table with a linear gap penalty;
    only two rows are kept in memory. Symmetric in its arguments and never
    negative.
    """
    return int(_sw_score_kernel(_as_bytes(a), _as_bytes(b), scheme.match, scheme.mismatch, scheme.gap))


def sw_distance(a: Union[Sequence, str], b: Union[Sequence, str], scheme: ScoringScheme = DEFAULT_SCHEME) -> float:
    """Normalized alignment distance in [0, 1]; 0 iff the score is maximal."""
    score = _sw_score_kernel(_as_bytes(a), _as_bytes(b), scheme.match, scheme.mismatch, scheme.gap)
    la = len(a.residues if isinstance(a, Sequence) else a)
    lb = len(b.residues if isinstance(b, Sequence) else b)
    return 1.0 - 2.0 * score / (scheme.match * (la + lb))


def _check_capacity(rows: int, cols: int, max_bytes: int | None) -> None:
    required = rows * cols * 4
    if max_bytes is not None and required > max_bytes:
        raise CapacityError(
            f"{rows}x{cols} float32 matrix requires {required} bytes, "
            f"exceeding the {max_bytes}-byte budget",
            required_bytes=required,
        )


def _alloc(rows: int, cols: int, max_bytes: int | None) -> np.ndarray:
    _check_capacity(rows, cols, max_bytes)
    try:
        return np.zeros((rows, cols), dtype=np.float32)
    except MemoryError:
        raise CapacityError(
            f"allocation of {rows}x{cols} float32 matrix ({rows * cols * 4} bytes) failed",
            required_bytes=rows * cols * 4,
        ) from None


def _row_blocks(weights: np.ndarray, n_blocks: int) -> list[tuple[int, int]]:
    # Split rows into contiguous blocks of roughly equal total weight.
    total = int(weights.sum())
    if total == 0:
        return [(0, len(weights))]
    cum = np.cumsum(weights)
    targets = [total * (b + 1) / n_blocks for b in range(n_blocks)]
    blocks, lo = [], 0
    for t in targets:
        hi = int(np.searchsorted(cum, t)) + 1
        hi = min(max(hi, lo), len(weights))
        if hi > lo:
            blocks.append((lo, hi))
            lo = hi
    if lo < len(weights):
        blocks.append((lo, len(weights)))
    return blocks


def pairwise_matrix(
    sset: SequenceSet,
    scheme: ScoringScheme = DEFAULT_SCHEME,
    threads: int = 1,
    max_bytes: int | None = None,
) -> DistanceMatrix:
    """All-against-all normalized distances for one set (symmetric, zero diagonal).

    Parameters
    ----------
    sset : SequenceSet
        Nonempty input set; N sequences produce an NxN matrix from
        N*(N-1)/2 alignments.
    threads : int
        Worker threads. Output bytes are identical for every thread count:
        the work is split into disjoint row blocks and every cell has
        exactly one writer.
    max_bytes : int, optional
        Budget for the output allocation; exceeding it raises
        :class:`CapacityError` stating the required bytes.
    """
    n = len(sset)
    if n == 0:
        raise ValueError("sequence set is empty")
    out = _alloc(n, n, max_bytes)
    data, starts, lens = _pack(sset)
    m, mm, g = scheme.match, scheme.mismatch, scheme.gap
    weights = np.arange(n, dtype=np.int64)  # row i aligns against j < i
    blocks = _row_blocks(weights, max(1, threads * 4))

    total_cells = 0
    if threads <= 1:
        for lo, hi in blocks:
            total_cells += int(_tri_block_kernel(data, starts, lens, lo, hi, m, mm, g, out))
            logger.debug("aligned rows [%d, %d) of %d", lo, hi, n)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_tri_block_kernel, data, starts, lens, lo, hi, m, mm, g, out)
                for lo, hi in blocks
            ]
            total_cells = sum(int(f.result()) for f in futures)
    alignments = n * (n - 1) // 2
    logger.info("pairwise matrix %dx%d: %d alignments, %d cells", n, n, alignments, total_cells)
    return DistanceMatrix(out, symmetric=True, alignments=alignments, cells=total_cells)


def rect_matrix(
    sset: SequenceSet,
    refs: SequenceSet,
    scheme: ScoringScheme = DEFAULT_SCHEME,
    threads: int = 1,
    max_bytes: int | None = None,
) -> DistanceMatrix:
    """Distances from every sequence in ``sset`` to every sequence in ``refs``.

    An N-sequence set against K references costs exactly N*K alignments,
    a fraction of the N*(N-1)/2 needed for the full square matrix.
    Deterministic for any ``threads`` value, as in :func:`pairwise_matrix`.
    """
    n, k = len(sset), len(refs)
    if n == 0 or k == 0:
        raise ValueError("both sequence sets must be nonempty")
    out = _alloc(n, k, max_bytes)
    data_a, starts_a, lens_a = _pack(sset)
    data_b, starts_b, lens_b = _pack(refs)
    m, mm, g = scheme.match, scheme.mismatch, scheme.gap
    blocks = _row_blocks(np.full(n, k, dtype=np.int64), max(1, threads * 4))

    total_cells = 0
    if threads <= 1:
        for lo, hi in blocks:
            total_cells += int(
                _rect_block_kernel(
                    data_a, starts_a, lens_a, data_b, starts_b, lens_b, lo, hi, m, mm, g, out
                )
            )
            logger.debug("aligned rows [%d, %d) of %d", lo, hi, n)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(
                    _rect_block_kernel,
                    data_a, starts_a, lens_a, data_b, starts_b, lens_b, lo, hi, m, mm, g, out,
                )
                for lo, hi in blocks
            ]
            total_cells = sum(int(f.result()) for f in futures)
    logger.info("rectangular matrix %dx%d: %d alignments, %d cells", n, k, n * k, total_cells)
    return DistanceMatrix(out, symmetric=False, alignments=n * k, cells=total_cells)
