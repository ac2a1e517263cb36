"""Synthetic clustered datasets of unit vectors for training and evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import ValidationError


@dataclass(frozen=True)
class SynthConfig:
    """Parameters for :func:`generate_clusters`.

    ``noise_sigma`` is the per-coordinate standard deviation of the isotropic
    Gaussian perturbation added to each class mean before renormalization.
    """

    num_classes: int
    samples_per_class: int
    dim: int
    noise_sigma: float
    seed: int

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValidationError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.samples_per_class < 2:
            raise ValidationError(f"samples_per_class must be >= 2, got {self.samples_per_class}")
        if self.dim < 2:
            raise ValidationError(f"dim must be >= 2, got {self.dim}")
        if not self.noise_sigma >= 0:
            raise ValidationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


def generate_clusters(cfg: SynthConfig) -> LabeledDataset:
    """Draw class means uniformly on the unit sphere, then noisy members.

    Each sample is ``normalize(mean + eps)`` with ``eps ~ N(0, noise_sigma^2 I)``.
    The RNG draw order is fixed (all class means first, then one perturbation
    block per class in label order), so equal seeds give bitwise-equal
    datasets. Rows are grouped by class: labels are ``0,...,0,1,...,1,...``.
    """
    rng = np.random.default_rng(cfg.seed)
    means = rng.standard_normal((cfg.num_classes, cfg.dim))
    means /= np.linalg.norm(means, axis=1, keepdims=True)

    blocks = []
    for c in range(cfg.num_classes):
        noise = rng.standard_normal((cfg.samples_per_class, cfg.dim)) * cfg.noise_sigma
        blocks.append(means[c] + noise)
    features = np.concatenate(blocks, axis=0)
    labels = np.repeat(np.arange(cfg.num_classes, dtype=np.int64), cfg.samples_per_class)
    return LabeledDataset.from_raw(features, labels)
