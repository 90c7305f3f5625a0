"""Exception types shared across the package."""


class SeqEmbedError(Exception):
    """Base class for all seqembed errors."""


class FastaParseError(SeqEmbedError):
    """Structurally malformed FASTA input (reports the offending line number)."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SequenceValidationError(SeqEmbedError):
    """A sequence violates the alphabet or a set-level invariant."""


class CapacityError(SeqEmbedError):
    """A requested allocation exceeds the available or configured budget."""

    def __init__(self, message: str, required_bytes: int):
        super().__init__(message)
        self.required_bytes = required_bytes


class EncodingError(SeqEmbedError):
    """Sequence-to-vector encoding cannot be performed as configured."""


class NumericError(SeqEmbedError):
    """Non-finite values appeared during network evaluation."""

    def __init__(self, message: str, layer: int):
        super().__init__(message)
        self.layer = layer


class TrainingError(SeqEmbedError):
    """Training diverged or was configured inconsistently."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class FormatError(SeqEmbedError):
    """A persisted artifact is truncated, corrupt, or of the wrong kind."""
