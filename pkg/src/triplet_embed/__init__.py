"""Discriminative linear embeddings from triplet similarity constraints.

The package learns a low-dimensional linear map for unit-norm feature vectors
by stochastic gradient descent on triplet hinge losses (a similarity form and
a squared-distance baseline), initialized with PCA and driven by online hard
negative mining. It also evaluates embeddings with standard biometric
verification and closed-set identification metrics.
"""

from .data import (
    LabeledDataset,
    Pair,
    Template,
    flatten_template,
    load_features,
    load_matrix,
    load_pairs,
    load_templates,
    normalize_unit,
    save_features,
    save_matrix,
    save_pairs,
    save_templates,
    subset,
)
from .evaluate import (
    all_pairs_protocol,
    class_templates,
    holdout_split,
    identify,
    score_pair,
    score_protocol,
    singleton_templates,
    template_subject,
    verification_metrics,
)
from .losses import tde_loss, tde_update, tse_loss, tse_update
from .metrics import RocCurve, ScoreSet, eer, roc, tar_at_far
from .pca import pca_decomposition, pca_init, project
from .synth import SynthConfig, generate_clusters
from .train import (
    TrainConfig,
    TrainReport,
    Triplet,
    mine_hard_negative,
    mine_hard_negative_distance,
    sample_anchor_positive,
    train_tde,
    train_tse,
)

__version__ = "0.1.0"

__all__ = [
    "LabeledDataset",
    "Pair",
    "RocCurve",
    "ScoreSet",
    "SynthConfig",
    "Template",
    "TrainConfig",
    "TrainReport",
    "Triplet",
    "all_pairs_protocol",
    "class_templates",
    "eer",
    "flatten_template",
    "generate_clusters",
    "holdout_split",
    "identify",
    "load_features",
    "load_matrix",
    "load_pairs",
    "load_templates",
    "mine_hard_negative",
    "mine_hard_negative_distance",
    "normalize_unit",
    "pca_decomposition",
    "pca_init",
    "project",
    "roc",
    "sample_anchor_positive",
    "save_features",
    "save_matrix",
    "save_pairs",
    "save_templates",
    "score_pair",
    "score_protocol",
    "singleton_templates",
    "subset",
    "tar_at_far",
    "tde_loss",
    "tde_update",
    "template_subject",
    "train_tde",
    "train_tse",
    "tse_loss",
    "tse_update",
    "verification_metrics",
]
