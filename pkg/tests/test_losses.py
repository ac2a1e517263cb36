import numpy as np
import pytest

from triplet_embed import tde_loss, tde_update, tse_loss, tse_update
from triplet_embed.errors import DimensionError

import oracles
from conftest import unit_rows


def _random_triplet(rng, dim=8, d_out=3):
    w = rng.standard_normal((d_out, dim)) / np.sqrt(dim)
    a, p, n = unit_rows(rng, 3, dim)
    return w, a, p, n


def _active_triplet(rng, loss_fn, alpha, dim=8, d_out=3, floor=1e-3):
    while True:
        w, a, p, n = _random_triplet(rng, dim, d_out)
        if loss_fn(w, a, p, n, alpha) > floor:
            return w, a, p, n


class TestTseLoss:
    def test_positive_equals_negative_equals_anchor(self, rng):
        w, a, _, _ = _random_triplet(rng)
        assert tse_loss(w, a, a, a, 0.1) == pytest.approx(0.1, abs=1e-15)

    def test_zero_matrix(self, rng):
        _, a, p, n = _random_triplet(rng)
        assert tse_loss(np.zeros((3, 8)), a, p, n, 0.25) == 0.25

    def test_non_negative(self, rng):
        for _ in range(300):
            w, a, p, n = _random_triplet(rng)
            assert tse_loss(w, a, p, n, 0.1) >= 0.0

    def test_matches_naive_arithmetic(self, rng):
        for _ in range(50):
            w, a, p, n = _random_triplet(rng)
            got = tse_loss(w, a, p, n, 0.1)
            want = oracles.naive_tse_loss(w, a, p, n, 0.1)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-14)

    def test_dimension_error(self, rng):
        w, a, p, n = _random_triplet(rng)
        with pytest.raises(DimensionError):
            tse_loss(w, a[:-1], p, n, 0.1)


class TestTseUpdate:
    def test_identical_positive_negative_is_noop(self, rng):
        w, a, p, _ = _random_triplet(rng)
        np.testing.assert_array_equal(tse_update(w, a, p, p, 0.05), w)

    def test_zero_eta_is_noop(self, rng):
        w, a, p, n = _random_triplet(rng)
        np.testing.assert_array_equal(tse_update(w, a, p, n, 0.0), w)

    def test_matches_finite_difference_gradient(self, rng):
        for _ in range(10):
            w, a, p, n = _active_triplet(rng, tse_loss, 0.1)
            analytic = w - tse_update(w, a, p, n, 1.0)  # eta * gradient at eta=1
            numeric = oracles.fd_gradient(lambda m: tse_loss(m, a, p, n, 0.1), w)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)

    def test_one_step_improvement(self, rng):
        for _ in range(10):
            w, a, p, n = _active_triplet(rng, tse_loss, 0.1)
            before = tse_loss(w, a, p, n, 0.1)
            eta = 0.1
            while eta > 1e-12:
                after = tse_loss(tse_update(w, a, p, n, eta), a, p, n, 0.1)
                if after < before:
                    break
                eta /= 2.0
            assert after < before


class TestTdeLoss:
    def test_degenerate_triplets_give_alpha(self, rng):
        w, a, p, _ = _random_triplet(rng)
        assert tde_loss(w, a, a, a, 0.3) == pytest.approx(0.3, abs=1e-15)
        assert tde_loss(w, a, p, p, 0.3) == pytest.approx(0.3, abs=1e-15)

    def test_non_negative(self, rng):
        for _ in range(300):
            w, a, p, n = _random_triplet(rng)
            assert tde_loss(w, a, p, n, 0.1) >= 0.0

    def test_matches_naive_arithmetic(self, rng):
        for _ in range(50):
            w, a, p, n = _random_triplet(rng)
            got = tde_loss(w, a, p, n, 0.1)
            want = oracles.naive_tde_loss(w, a, p, n, 0.1)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-14)


class TestTdeUpdate:
    def test_identical_positive_negative_is_noop(self, rng):
        w, a, p, _ = _random_triplet(rng)
        np.testing.assert_array_equal(tde_update(w, a, p, p, 0.05), w)

    def test_zero_eta_is_noop(self, rng):
        w, a, p, n = _random_triplet(rng)
        np.testing.assert_array_equal(tde_update(w, a, p, n, 0.0), w)

    def test_matches_finite_difference_gradient(self, rng):
        for _ in range(10):
            w, a, p, n = _active_triplet(rng, tde_loss, 0.1)
            analytic = w - tde_update(w, a, p, n, 1.0)
            numeric = oracles.fd_gradient(lambda m: tde_loss(m, a, p, n, 0.1), w)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)

    def test_one_step_improvement(self, rng):
        for _ in range(10):
            w, a, p, n = _active_triplet(rng, tde_loss, 0.1)
            before = tde_loss(w, a, p, n, 0.1)
            eta = 0.1
            while eta > 1e-12:
                after = tde_loss(tde_update(w, a, p, n, eta), a, p, n, 0.1)
                if after < before:
                    break
                eta /= 2.0
            assert after < before
