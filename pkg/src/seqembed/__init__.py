"""Embed gene-sequence datasets into 2-3 dimensions.

Sequences are turned into fixed-length vectors (one-hot, ordinal, or
distances to a sampled reference panel), reduced by a mirrored autoencoder
or a stress-majorization baseline, and scored with clustering and
distance-preservation metrics. Every stage is seeded and reproducible.
"""

from .alignment import (
    DEFAULT_SCHEME,
    DistanceMatrix,
    ScoringScheme,
    pairwise_matrix,
    rect_matrix,
    sw_distance,
    sw_score,
)
from .autoencoder import (
    AutoencoderEmbedder,
    Embedding,
    ModelWeights,
    NetworkSpec,
    TrainConfig,
    embed,
    encode_features,
    forward,
    init_weights,
    load_model,
    load_model_file,
    loss_and_grads,
    save_model,
    save_model_file,
    train,
)
from .encoding import (
    EncodedDataset,
    OneHotSequenceEncoder,
    OrdinalSequenceEncoder,
    ReferencePanel,
    ReferencePanelEncoder,
    one_hot_encode,
    ordinal_encode,
    reference_encode,
    sample_references,
)
from .errors import (
    CapacityError,
    EncodingError,
    FastaParseError,
    FormatError,
    NumericError,
    SeqEmbedError,
    SequenceValidationError,
    TrainingError,
)
from .evaluation import (
    ClusterLabels,
    HeatmapGrid,
    LloydKMeans,
    distance_heatmap,
    kmeans,
    oos_accuracy,
    oos_protocol,
    silhouette,
)
from .mds import MdsConfig, SmacofMDS, smacof, stress
from .sequences import (
    DNA,
    Alphabet,
    Sequence,
    SequenceSet,
    dedup,
    parse_fasta,
    synth_dataset,
    write_fasta,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AutoencoderEmbedder",
    "CapacityError",
    "ClusterLabels",
    "DEFAULT_SCHEME",
    "DNA",
    "DistanceMatrix",
    "EncodedDataset",
    "EncodingError",
    "Embedding",
    "FastaParseError",
    "FormatError",
    "HeatmapGrid",
    "LloydKMeans",
    "MdsConfig",
    "ModelWeights",
    "NetworkSpec",
    "NumericError",
    "OneHotSequenceEncoder",
    "OrdinalSequenceEncoder",
    "ReferencePanel",
    "ReferencePanelEncoder",
    "ScoringScheme",
    "SeqEmbedError",
    "Sequence",
    "SequenceSet",
    "SequenceValidationError",
    "SmacofMDS",
    "TrainConfig",
    "TrainingError",
    "dedup",
    "distance_heatmap",
    "embed",
    "encode_features",
    "forward",
    "init_weights",
    "kmeans",
    "load_model",
    "load_model_file",
    "loss_and_grads",
    "one_hot_encode",
    "oos_accuracy",
    "oos_protocol",
    "ordinal_encode",
    "pairwise_matrix",
    "parse_fasta",
    "rect_matrix",
    "reference_encode",
    "sample_references",
    "save_model",
    "save_model_file",
    "silhouette",
    "smacof",
    "stress",
    "sw_distance",
    "sw_score",
    "synth_dataset",
    "train",
    "write_fasta",
]
