"""Consensus clustering through embeddings of basic partitions."""
from . import io
from ._accel import get_backend, set_backend, use_backend
from .coassoc import consensus_propagate, hac_consensus, propagation_operator
from .cor import augment_flip, cor_fuse, holoentropy
from .core import (
    MISSING,
    BasicPartitionSet,
    BinaryCoding,
    ConsensusOutcome,
    Partition,
    build_coassociation,
    degree_weights,
    encode_binary,
)
from .generate import (
    DataMatrix,
    GenerationConfig,
    base_kmeans,
    generate,
    generate_rfs,
    generate_rps,
    generate_subsample,
)
from .iec import iec_fuse, marginalized_map
from .kcc import UtilityKind, constrained_fuse, kcc_distance, kcc_fuse, utility
from .metrics import ari, ensemble_agreement, nmi, purity
from .sec import sec_fuse_dense, sec_fuse_sparse, weighted_kmeans

__version__ = "0.1.0"

__all__ = [
    "BasicPartitionSet",
    "BinaryCoding",
    "ConsensusOutcome",
    "DataMatrix",
    "GenerationConfig",
    "MISSING",
    "Partition",
    "UtilityKind",
    "ari",
    "augment_flip",
    "base_kmeans",
    "build_coassociation",
    "consensus_propagate",
    "constrained_fuse",
    "cor_fuse",
    "degree_weights",
    "encode_binary",
    "ensemble_agreement",
    "generate",
    "generate_rfs",
    "generate_rps",
    "generate_subsample",
    "get_backend",
    "hac_consensus",
    "holoentropy",
    "iec_fuse",
    "io",
    "kcc_distance",
    "kcc_fuse",
    "marginalized_map",
    "nmi",
    "propagation_operator",
    "purity",
    "sec_fuse_dense",
    "sec_fuse_sparse",
    "set_backend",
    "use_backend",
    "utility",
    "weighted_kmeans",
]
