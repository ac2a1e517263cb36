import numpy as np
import pytest

from triplet_embed import LabeledDataset, pca_decomposition, pca_init, project
from triplet_embed.errors import DimensionError, InsufficientDataError

import oracles
from conftest import random_dataset, unit_rows


def test_rank_one_data_recovers_the_line():
    direction = np.array([2.0, -1.0, 2.0]) / 3.0
    rows = np.concatenate([np.tile(direction, (10, 1)), np.tile(-direction, (10, 1))])
    ds = LabeledDataset(rows, np.zeros(20, dtype=int))
    w = pca_init(ds, 1)
    assert abs(float(w[0] @ direction)) == pytest.approx(1.0, abs=1e-10)


def test_rows_orthonormal():
    ds = random_dataset(31, num_classes=4, per_class=10, dim=11)
    w = pca_init(ds, 5)
    np.testing.assert_allclose(w @ w.T, np.eye(5), atol=1e-8)


def test_matches_independent_eigendecomposition():
    ds = random_dataset(32, num_classes=5, per_class=20, dim=8, sigma=0.6)
    w, eigvals = pca_decomposition(ds, 3)
    w_ref, eig_ref = oracles.covariance_eig(ds.features, 3)
    np.testing.assert_allclose(eigvals, eig_ref, rtol=1e-8)
    np.testing.assert_allclose(w, w_ref, atol=1e-8)


def test_eigenvalues_match_svd_route():
    ds = random_dataset(33, num_classes=4, per_class=12, dim=9)
    _, eigvals = pca_decomposition(ds, 4)
    centered = ds.features - ds.features.mean(axis=0)
    singular = np.linalg.svd(centered, compute_uv=False)
    np.testing.assert_allclose(eigvals, singular[:4] ** 2 / (ds.num_samples - 1), rtol=1e-8)


def test_sign_convention_and_ordering():
    ds = random_dataset(34, num_classes=3, per_class=15, dim=10)
    w, eigvals = pca_decomposition(ds, 6)
    assert np.all(np.diff(eigvals) <= 0)
    for row in w:
        nz = row[row != 0]
        assert nz.size and nz[0] > 0


def test_preconditions():
    ds = random_dataset(35, num_classes=2, per_class=3, dim=8)  # N = 6
    with pytest.raises(InsufficientDataError):
        pca_init(ds, 6)
    with pytest.raises(DimensionError):
        pca_init(ds, 8)
    with pytest.raises(DimensionError):
        pca_init(ds, 0)


class TestProject:
    def test_identity_block(self):
        w = np.eye(3, 8)
        x = np.zeros(8)
        x[0] = 1.0
        np.testing.assert_array_equal(project(w, x), [1.0, 0.0, 0.0])

    def test_linearity_in_w(self, rng):
        w = rng.standard_normal((4, 7))
        x = unit_rows(rng, 1, 7)[0]
        np.testing.assert_array_equal(project(2.0 * w, x), 2.0 * project(w, x))

    def test_matches_naive_matvec(self, rng):
        for _ in range(20):
            w = rng.standard_normal((5, 9))
            x = rng.standard_normal(9)
            np.testing.assert_allclose(
                project(w, x), oracles.naive_matvec(w, x), rtol=1e-12, atol=1e-14
            )

    def test_dimension_error(self, rng):
        with pytest.raises(DimensionError):
            project(rng.standard_normal((3, 5)), np.ones(4))
