"""Gene-sequence datasets: FASTA ingestion, validation, dedup, and synthesis."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, TextIO, Union

import numpy as np

from .errors import FastaParseError, SequenceValidationError


class Alphabet:
    """An ordered set of residue symbols with 0-based index lookup.

    Parameters
    ----------
    symbols : str
        Unique, nonempty characters in a fixed order. The default is the
        four-letter nucleotide alphabet ``ATGC``.
    """

    def __init__(self, symbols: str = "ATGC"):
        if not symbols:
            raise ValueError("alphabet must be nonempty")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"alphabet symbols must be unique, got {symbols!r}")
        self.symbols = symbols
        self._index = {c: i for i, c in enumerate(symbols)}

    def index(self, symbol: str) -> int:
        """Return the 0-based position of ``symbol``."""
        try:
            return self._index[symbol]
        except KeyError:
            raise SequenceValidationError(
                f"character {symbol!r} is not in alphabet {self.symbols!r}"
            ) from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and other.symbols == self.symbols

    def __repr__(self) -> str:
        return f"Alphabet({self.symbols!r})"


DNA = Alphabet("ATGC")


@dataclass(frozen=True)
class Sequence:
    """An identified residue string."""

    id: str
    residues: str

    def __post_init__(self):
        if not self.id:
            raise SequenceValidationError("sequence id must be nonempty")
        if not self.residues:
            raise SequenceValidationError(f"sequence {self.id!r} has no residues")

    def __len__(self) -> int:
        return len(self.residues)

    def validate(self, alphabet: Alphabet) -> None:
        """Raise if any residue falls outside ``alphabet``."""
        for ch in self.residues:
            if ch not in alphabet:
                raise SequenceValidationError(
                    f"sequence {self.id!r} contains {ch!r}, "
                    f"not in alphabet {alphabet.symbols!r}"
                )


class SequenceSet:
    """An ordered collection of sequences with unique ids."""

    def __init__(self, sequences: Iterable[Sequence]):
        self.sequences = list(sequences)
        seen = set()
        for seq in self.sequences:
            if seq.id in seen:
                raise SequenceValidationError(f"duplicate sequence id {seq.id!r}")
            seen.add(seq.id)
        self._by_id = {seq.id: seq for seq in self.sequences}

    @property
    def ids(self) -> list[str]:
        return [seq.id for seq in self.sequences]

    @property
    def max_len(self) -> int:
        """Length of the longest sequence in the set."""
        return max(len(seq) for seq in self.sequences) if self.sequences else 0

    def get(self, seq_id: str) -> Sequence:
        try:
            return self._by_id[seq_id]
        except KeyError:
            raise LookupError(f"unknown sequence id {seq_id!r}") from None

    def __contains__(self, seq_id: str) -> bool:
        return seq_id in self._by_id

    def __len__(self) -> int:
        return len(self.sequences)

    def __getitem__(self, i: int) -> Sequence:
        return self.sequences[i]

    def __iter__(self) -> Iterator[Sequence]:
        return iter(self.sequences)

    def __eq__(self, other) -> bool:
        return isinstance(other, SequenceSet) and other.sequences == self.sequences


FastaSource = Union[str, bytes, Path, TextIO]


def _open_text(source: FastaSource) -> TextIO:
    if isinstance(source, Path):
        return source.open("r", encoding="ascii")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("ascii"))
    if isinstance(source, str):
        # A string is raw FASTA text if it starts a record, else a path.
        if source.lstrip().startswith(">"):
            return io.StringIO(source)
        return open(source, "r", encoding="ascii")
    return source


def parse_fasta(source: FastaSource, alphabet: Alphabet = DNA) -> SequenceSet:
    """Parse FASTA text into a validated SequenceSet.

    Record ids are taken from the header up to the first whitespace;
    residues are uppercased and multi-line records concatenated.

    Parameters
    ----------
    source : str | bytes | Path | file-like
        FASTA content, or a path to it. A ``str`` beginning with ``>``
        is treated as inline content.
    alphabet : Alphabet
        Residues outside this alphabet are rejected, naming the sequence
        and the offending character.

    Raises
    ------
    FastaParseError
        Sequence data before any header, or an empty header/record.
    SequenceValidationError
        Characters outside the alphabet, or duplicate ids.
    """
    handle = _open_text(source)
    records: list[Sequence] = []
    current_id: str | None = None
    current_parts: list[str] = []
    header_line = 0

    def flush():
        if current_id is None:
            return
        residues = "".join(current_parts)
        if not residues:
            raise FastaParseError(f"record {current_id!r} has no sequence lines", header_line)
        records.append(Sequence(current_id, residues))

    try:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith(">"):
                flush()
                current_id = line[1:].split()[0] if line[1:].split() else ""
                if not current_id:
                    raise FastaParseError("empty FASTA header", lineno)
                current_parts = []
                header_line = lineno
            else:
                if current_id is None:
                    raise FastaParseError("sequence data before any '>' header", lineno)
                current_parts.append(line.upper())
        flush()
    finally:
        if handle is not source:
            handle.close()

    result = SequenceSet(records)
    for seq in result:
        seq.validate(alphabet)
    return result


def write_fasta(sset: SequenceSet, dest: Union[str, Path, TextIO]) -> None:
    """Write one record per sequence; inverse of :func:`parse_fasta`."""
    own = isinstance(dest, (str, Path))
    handle = open(dest, "w", encoding="ascii") if own else dest
    try:
        for seq in sset:
            handle.write(f">{seq.id}\n{seq.residues}\n")
    finally:
        if own:
            handle.close()


class DedupResult(NamedTuple):
    unique: SequenceSet
    multiplicity: dict[str, int]
    recurrent: SequenceSet


def dedup(sset: SequenceSet) -> DedupResult:
    """Collapse duplicate residue strings, keeping each first occurrence.

    Returns the deduplicated set, occurrence counts keyed by the kept id,
    and the recurrent subset (kept sequences that occurred more than once),
    all in input order.
    """
    first: dict[str, Sequence] = {}
    counts: dict[str, int] = {}
    for seq in sset:
        kept = first.get(seq.residues)
        if kept is None:
            first[seq.residues] = seq
            counts[seq.id] = 1
        else:
            counts[kept.id] += 1
    unique = SequenceSet(first.values())
    recurrent = SequenceSet(s for s in unique if counts[s.id] > 1)
    return DedupResult(unique, counts, recurrent)


def write_multiplicity_tsv(multiplicity: dict[str, int], dest: Union[str, Path, TextIO]) -> None:
    own = isinstance(dest, (str, Path))
    handle = open(dest, "w", encoding="ascii") if own else dest
    try:
        handle.write("id\tcount\n")
        for seq_id, count in multiplicity.items():
            handle.write(f"{seq_id}\t{count}\n")
    finally:
        if own:
            handle.close()


def synth_dataset(
    n_clusters: int,
    per_cluster: int,
    seed_len: int,
    mutation_rate: float,
    rng_seed: int,
    alphabet: Alphabet = DNA,
) -> tuple[SequenceSet, dict[str, int]]:
    """Generate a clustered synthetic dataset with known labels.

    Each cluster grows from a random seed sequence of ``seed_len``. Members
    apply i.i.d. per-position substitutions (always to a different symbol)
    at ``mutation_rate``, then a random length change of up to +/-10% via
    single-position insertions or deletions. A zero mutation rate yields
    exact copies of the seed, with no length change.

    Returns the set and a map from sequence id to its cluster index.
    Deterministic for a fixed ``rng_seed``.
    """
    if not 0.0 <= mutation_rate <= 0.5:
        raise ValueError(f"mutation_rate must be in [0, 0.5], got {mutation_rate}")
    if n_clusters < 1 or per_cluster < 1 or seed_len < 1:
        raise ValueError("n_clusters, per_cluster and seed_len must all be >= 1")

    rng = np.random.default_rng(rng_seed)
    n_sym = len(alphabet)
    symbols = np.frombuffer(alphabet.symbols.encode("ascii"), dtype=np.uint8)
    width = len(str(per_cluster - 1))

    sequences: list[Sequence] = []
    labels: dict[str, int] = {}
    for c in range(n_clusters):
        seed = rng.integers(0, n_sym, seed_len)
        for m in range(per_cluster):
            codes = seed.copy()
            if mutation_rate > 0.0:
                mask = rng.random(seed_len) < mutation_rate
                shift = rng.integers(1, n_sym, seed_len)
                codes = np.where(mask, (codes + shift) % n_sym, codes)
                max_delta = int(0.1 * seed_len)
                delta = int(rng.integers(-max_delta, max_delta + 1)) if max_delta else 0
                edited = list(codes)
                for _ in range(delta):
                    pos = int(rng.integers(0, len(edited) + 1))
                    edited.insert(pos, int(rng.integers(0, n_sym)))
                for _ in range(-delta):
                    pos = int(rng.integers(0, len(edited)))
                    del edited[pos]
                codes = np.asarray(edited)
            residues = symbols[codes].tobytes().decode("ascii")
            seq_id = f"c{c}_m{m:0{width}d}"
            sequences.append(Sequence(seq_id, residues))
            labels[seq_id] = c
    return SequenceSet(sequences), labels
