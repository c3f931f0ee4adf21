"""
Core modules for SEQMEM v1.0
"""

from .errors import (
    SeqMemError, DimensionError, ParameterError, CapExceededError,
    FormatError, BoundSearchError, UnmemorizableError,
)
from .network import (
    FiringMatrix, NetworkParams, VerificationReport, network_step, run_sequence,
    recall, margins, verify_memorization,
)
from .single_pass import SinglePassNetwork, StreamState, train_single_pass, stream_update
from .multi_pass import DenseNetwork, TrainConfig, sgd_train, train_dense
from .bounds import BoundParams, BoundResult, failure_bound, min_L_for_target

# experiments is imported as core.experiments; it pulls in utils.stats

__all__ = [
    "SeqMemError",
    "DimensionError",
    "ParameterError",
    "CapExceededError",
    "FormatError",
    "BoundSearchError",
    "UnmemorizableError",
    "FiringMatrix",
    "NetworkParams",
    "VerificationReport",
    "network_step",
    "run_sequence",
    "recall",
    "margins",
    "verify_memorization",
    "SinglePassNetwork",
    "StreamState",
    "train_single_pass",
    "stream_update",
    "DenseNetwork",
    "TrainConfig",
    "sgd_train",
    "train_dense",
    "BoundParams",
    "BoundResult",
    "failure_bound",
    "min_L_for_target",
]
