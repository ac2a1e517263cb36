import numpy as np
import pytest

from triplet_embed import (
    LabeledDataset,
    Triplet,
    mine_hard_negative,
    mine_hard_negative_distance,
    sample_anchor_positive,
)
from triplet_embed.errors import NoNegativesError, NoValidAnchorError, ValidationError
from triplet_embed.train import _SamplingTables

from conftest import random_dataset, unit_rows


class TestSampleAnchorPositive:
    def test_forced_pair_in_two_sample_class(self):
        ds = LabeledDataset(np.eye(3)[:2], np.array([4, 4]))
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, p = sample_anchor_positive(ds, rng)
            assert {a, p} == {0, 1}

    def test_singleton_only_dataset(self):
        ds = LabeledDataset(np.eye(4)[:3], np.array([0, 1, 2]))
        with pytest.raises(NoValidAnchorError):
            sample_anchor_positive(ds, np.random.default_rng(0))

    def test_singleton_classes_never_anchor(self):
        rows = np.eye(5)
        ds = LabeledDataset(rows, np.array([0, 0, 1, 2, 3]))
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, p = sample_anchor_positive(ds, rng)
            assert a in (0, 1) and p in (0, 1) and a != p

    def test_tables_match_op_draw_for_draw(self):
        ds = random_dataset(41, num_classes=3, per_class=5)
        tables = _SamplingTables(ds)
        rng_a = np.random.default_rng(7)
        rng_b = np.random.default_rng(7)
        for _ in range(200):
            assert sample_anchor_positive(ds, rng_a) == tables.sample_anchor_positive(rng_b)

    def test_anchor_and_positive_uniformity(self):
        # two classes of three: six eligible anchors, two positives each
        rows = unit_rows(np.random.default_rng(5), 6, 8)
        ds = LabeledDataset(rows / np.linalg.norm(rows, axis=1, keepdims=True),
                            np.array([0, 0, 0, 1, 1, 1]))
        tables = _SamplingTables(ds)
        rng = np.random.default_rng(123)
        draws = 100_000
        anchor_counts = np.zeros(6)
        pair_counts = {}
        for _ in range(draws):
            a, p = tables.sample_anchor_positive(rng)
            anchor_counts[a] += 1
            pair_counts[(a, p)] = pair_counts.get((a, p), 0) + 1
        p_anchor = 1 / 6
        sigma = np.sqrt(draws * p_anchor * (1 - p_anchor))
        assert np.all(np.abs(anchor_counts - draws * p_anchor) <= 5 * sigma)
        p_pair = 1 / 12  # anchor uniform over 6, positive uniform over 2 peers
        sigma_pair = np.sqrt(draws * p_pair * (1 - p_pair))
        for count in pair_counts.values():
            assert abs(count - draws * p_pair) <= 5 * sigma_pair
        assert len(pair_counts) == 12


class TestTriplet:
    def test_sampled_and_mined_triplets_are_valid(self):
        ds = random_dataset(45, num_classes=3, per_class=4, dim=8)
        rng = np.random.default_rng(1)
        for _ in range(30):
            a, p = sample_anchor_positive(ds, rng)
            n = mine_hard_negative(np.eye(ds.dim), ds, a, 8, rng)
            Triplet(a, p, n).validate(ds)

    def test_invalid_triplets_rejected(self):
        ds = random_dataset(46, num_classes=2, per_class=3, dim=8)
        with pytest.raises(ValidationError):
            Triplet(0, 0, 3).validate(ds)  # anchor == positive
        with pytest.raises(ValidationError):
            Triplet(0, 3, 4).validate(ds)  # positive from another class
        with pytest.raises(ValidationError):
            Triplet(0, 1, 2).validate(ds)  # negative shares the anchor's class
        with pytest.raises(ValidationError):
            Triplet(0, 1, 99).validate(ds)


class TestMineHardNegative:
    def test_pool_of_one_returns_that_candidate(self):
        ds = random_dataset(42, num_classes=2, per_class=3, dim=6)
        w = np.eye(3, 6)
        rng_pick = np.random.default_rng(11)
        rng_replay = np.random.default_rng(11)
        got = mine_hard_negative(w, ds, 0, 1, rng_pick)
        negatives = np.flatnonzero(ds.labels != ds.labels[0])
        expected = negatives[rng_replay.integers(0, negatives.size, size=1)][0]
        assert got == expected

    def test_duplicate_of_anchor_wins_under_identity(self):
        anchor = np.zeros(6)
        anchor[0] = 1.0
        others = unit_rows(np.random.default_rng(9), 3, 6)
        rows = np.vstack([anchor, anchor, others])
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        ds = LabeledDataset(rows, np.array([0, 1, 1, 1, 1]))
        # row 1 duplicates the anchor with a different label; Cauchy-Schwarz
        # makes it the most similar candidate whenever it is drawn
        got = mine_hard_negative(np.eye(6), ds, 0, 64, np.random.default_rng(2))
        assert got == 1

    def test_matches_bruteforce_scan(self, rng):
        import oracles

        for trial in range(20):
            ds = random_dataset(100 + trial, num_classes=4, per_class=6, dim=10)
            w = rng.standard_normal((4, 10))
            seed = int(rng.integers(0, 2**32))
            anchor = int(rng.integers(0, ds.num_samples))
            negatives = np.flatnonzero(ds.labels != ds.labels[anchor])
            draws = np.random.default_rng(seed).integers(0, negatives.size, size=30)
            got_sim = mine_hard_negative(w, ds, anchor, 30, np.random.default_rng(seed))
            got_dist = mine_hard_negative_distance(
                w, ds, anchor, 30, np.random.default_rng(seed)
            )
            assert got_sim == oracles.oracle_hard_negative(
                w, ds.features, ds.labels, anchor, draws, "similarity"
            )
            assert got_dist == oracles.oracle_hard_negative(
                w, ds.features, ds.labels, anchor, draws, "distance"
            )

    def test_positive_rescaling_keeps_argmax(self, rng):
        ds = random_dataset(43, num_classes=3, per_class=6, dim=8)
        w = rng.standard_normal((3, 8))
        for scale in (2.0, 3.0, 0.5):
            a = mine_hard_negative(w, ds, 1, 16, np.random.default_rng(77))
            b = mine_hard_negative(scale * w, ds, 1, 16, np.random.default_rng(77))
            assert a == b

    def test_no_negatives(self):
        ds = LabeledDataset(np.eye(4)[:3], np.array([2, 2, 2]))
        with pytest.raises(NoNegativesError):
            mine_hard_negative(np.eye(4), ds, 0, 5, np.random.default_rng(0))

    def test_bad_pool_size_and_anchor(self):
        ds = random_dataset(44)
        with pytest.raises(ValidationError):
            mine_hard_negative(np.eye(ds.dim), ds, 0, 0, np.random.default_rng(0))
        with pytest.raises(ValidationError):
            mine_hard_negative(np.eye(ds.dim), ds, ds.num_samples, 5, np.random.default_rng(0))
