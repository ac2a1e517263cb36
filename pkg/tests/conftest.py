import numpy as np
import pytest

from triplet_embed import LabeledDataset, SynthConfig, generate_clusters


def unit_rows(rng, n, dim):
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def random_dataset(seed, num_classes=4, per_class=8, dim=12, sigma=0.25):
    return generate_clusters(SynthConfig(num_classes, per_class, dim, sigma, seed))


def separated_dataset(num_classes=8, per_class=2, dim=16):
    """Classes sitting on orthogonal axes with zero noise.

    With d_out = num_classes - 1 the PCA rows span the centered class
    directions exactly, so every projected same-class similarity is 1 - 1/k
    and every cross-class similarity is -1/k: no triplet violates any margin
    below 1, for either objective.
    """
    rows = np.repeat(np.eye(dim)[:num_classes], per_class, axis=0)
    labels = np.repeat(np.arange(num_classes), per_class)
    return LabeledDataset(rows, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
