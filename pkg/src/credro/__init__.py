"""Credal-set uncertainty quantification for robustly reweighted ensembles.

Train an ensemble of small softmax classifiers where each member
backpropagates only through the highest-loss fraction of every batch,
wrap the member predictions into box or convex-hull credal sets, and
score epistemic uncertainty as the spread between the set's upper and
lower Shannon entropy.  Evaluation helpers cover OOD-detection AUROC,
calibration error, and accuracy-rejection curves.
"""

from ._backend import active_backend, available_backends
from .datasets import DatasetSpec, gen_dataset
from .entropy import (
    EntropyOptimum,
    EntropyPair,
    HullWeights,
    box_entropy_pair,
    hull_entropy_pair,
    lower_entropy_box,
    lower_entropy_hull,
    nats_to_bits,
    shannon_entropy,
    upper_entropy_box,
    upper_entropy_hull,
)
from .errors import (
    ChecksumError,
    CredroError,
    DataFormatError,
    InfeasibleBoxError,
    OracleMismatchError,
    TrainingError,
    UndefinedMetricError,
    UndefinedNormalizationError,
    UnsupportedDimensionError,
    ValidationError,
)
from .measures import (
    UncertaintyBreakdown,
    entropy_difference_eu,
    interval_width_eu,
    mi_decomposition,
    pil,
)
from .metrics import (
    ArCurve,
    PilSummary,
    ScoredBinarySample,
    accuracy_rejection,
    auroc,
    auroc_scores,
    ece,
    ece_arrays,
    normalized_ar,
    pil_summary,
)
from .mlp import MlpModel, ce_loss, forward
from .oracles import (
    auroc_pair_count,
    grid_oracle_entropy,
    hull_weight_grid,
    polish_entropy_pair,
    random_restart_lower,
)
from .simplex import (
    BoxCredalSet,
    MemberSet,
    ProbVector,
    box_contains,
    extract_intervals,
    mean_prediction,
    softmax,
)
from .train import (
    EnsembleArtifact,
    TrainConfig,
    delta_schedule,
    predict_ensemble,
    predict_members,
    select_top_delta,
    selection_count,
    train_deep_ensemble,
    train_ensemble,
    train_member,
)

__version__ = "0.1.0"

__all__ = [
    "ArCurve",
    "BoxCredalSet",
    "ChecksumError",
    "CredroError",
    "DataFormatError",
    "DatasetSpec",
    "EnsembleArtifact",
    "EntropyOptimum",
    "EntropyPair",
    "HullWeights",
    "InfeasibleBoxError",
    "MemberSet",
    "MlpModel",
    "OracleMismatchError",
    "PilSummary",
    "ProbVector",
    "ScoredBinarySample",
    "TrainConfig",
    "TrainingError",
    "UncertaintyBreakdown",
    "UndefinedMetricError",
    "UndefinedNormalizationError",
    "UnsupportedDimensionError",
    "ValidationError",
    "accuracy_rejection",
    "active_backend",
    "auroc",
    "auroc_pair_count",
    "auroc_scores",
    "available_backends",
    "grid_oracle_entropy",
    "hull_weight_grid",
    "polish_entropy_pair",
    "random_restart_lower",
    "box_contains",
    "box_entropy_pair",
    "ce_loss",
    "delta_schedule",
    "ece",
    "ece_arrays",
    "entropy_difference_eu",
    "extract_intervals",
    "forward",
    "gen_dataset",
    "hull_entropy_pair",
    "interval_width_eu",
    "lower_entropy_box",
    "lower_entropy_hull",
    "mean_prediction",
    "mi_decomposition",
    "nats_to_bits",
    "normalized_ar",
    "pil",
    "pil_summary",
    "predict_ensemble",
    "predict_members",
    "select_top_delta",
    "selection_count",
    "shannon_entropy",
    "softmax",
    "train_deep_ensemble",
    "train_ensemble",
    "train_member",
    "upper_entropy_box",
    "upper_entropy_hull",
]
