"""SGD training of the embedding matrix with online triplets and hard mining.

One iteration samples a random anchor and positive, draws a pool of
different-class candidates with replacement, keeps the hardest one under the
current matrix, and applies the hinge update only if the triplet violates the
margin. The RNG draw order per iteration is fixed (anchor, positive, then one
vectorized pool draw), so equal seeds reproduce runs bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import (
    DimensionError,
    NoNegativesError,
    NoValidAnchorError,
    ValidationError,
)
from .losses import tde_update, tse_update
from .pca import pca_init

_TRACE_WINDOW = 1000
_REPROJECT_EVERY = 1000  # guards the incremental projection cache against fp drift
_GRAM_MAX_ROWS = 2048  # above this, skip the O(N^2) feature Gram cache


@dataclass(frozen=True)
class Triplet:
    """Anchor/positive/negative row indices into one dataset."""

    anchor: int
    positive: int
    negative: int

    def validate(self, ds: LabeledDataset) -> "Triplet":
        """Check the defining label constraints against a dataset."""
        labels = ds.labels
        for name, i in (("anchor", self.anchor), ("positive", self.positive),
                        ("negative", self.negative)):
            if not 0 <= i < ds.num_samples:
                raise ValidationError(f"{name} index {i} out of range")
        if self.anchor == self.positive:
            raise ValidationError("anchor and positive must be distinct rows")
        if labels[self.anchor] != labels[self.positive]:
            raise ValidationError("anchor and positive must share a label")
        if labels[self.negative] == labels[self.anchor]:
            raise ValidationError("negative must come from a different class")
        return self


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by the similarity and distance trainers."""

    d_out: int = 128
    alpha: float = 0.1
    eta: float = 0.01
    max_iter: int = 50_000
    negative_pool: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValidationError(f"alpha must be > 0, got {self.alpha}")
        if not self.eta > 0:
            raise ValidationError(f"eta must be > 0, got {self.eta}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.negative_pool < 1:
            raise ValidationError(f"negative_pool must be >= 1, got {self.negative_pool}")
        if self.d_out < 1:
            raise ValidationError(f"d_out must be >= 1, got {self.d_out}")


@dataclass(frozen=True)
class TrainReport:
    """Outcome of a training run.

    ``loss_trace`` holds ``(iteration, mean hinge loss)`` per window of 1000
    iterations (zeros included; final window may be partial). Diagnostic only.
    """

    iterations_run: int
    violations_updated: int
    loss_trace: tuple[tuple[int, float], ...]


class _SamplingTables:
    """Per-dataset index tables backing anchor/positive/negative draws."""

    def __init__(self, ds: LabeledDataset):
        labels = ds.labels
        uniq, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
        self.labels = labels
        self.rows_by_label = {int(c): np.flatnonzero(labels == c) for c in uniq}
        self.eligible_anchors = np.flatnonzero(counts[inverse] >= 2)
        self.num_labels = uniq.size
        self._negatives: dict[int, np.ndarray] = {}

    def negatives_of(self, label: int) -> np.ndarray:
        cached = self._negatives.get(label)
        if cached is None:
            cached = np.flatnonzero(self.labels != label)
            self._negatives[label] = cached
        return cached

    def sample_anchor_positive(self, rng: np.random.Generator) -> tuple[int, int]:
        if self.eligible_anchors.size == 0:
            raise NoValidAnchorError("every class is a singleton; no positive pair exists")
        a = int(self.eligible_anchors[rng.integers(0, self.eligible_anchors.size)])
        rows = self.rows_by_label[int(self.labels[a])]
        j = int(rng.integers(0, rows.size - 1))
        p = int(rows[j]) if int(rows[j]) != a else int(rows[-1])
        return a, p


def sample_anchor_positive(ds: LabeledDataset, rng: np.random.Generator) -> tuple[int, int]:
    """Draw a uniform anchor (over rows whose class has >= 2 samples) and a
    uniform positive among the anchor's same-class peers.

    Consumes exactly two RNG draws.
    """
    return _SamplingTables(ds).sample_anchor_positive(rng)


def _draw_pool(
    ds: LabeledDataset, anchor_idx: int, pool_size: int, rng: np.random.Generator
) -> np.ndarray:
    if not 0 <= anchor_idx < ds.num_samples:
        raise ValidationError(f"anchor index {anchor_idx} out of range")
    if pool_size < 1:
        raise ValidationError(f"pool_size must be >= 1, got {pool_size}")
    negatives = np.flatnonzero(ds.labels != ds.labels[anchor_idx])
    if negatives.size == 0:
        raise NoNegativesError("all rows share the anchor's label")
    return negatives[rng.integers(0, negatives.size, size=int(pool_size))]


def _check_projection_dims(w: np.ndarray, ds: LabeledDataset) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] != ds.dim:
        raise DimensionError(f"matrix shape {w.shape} does not match feature dim {ds.dim}")
    return w


def mine_hard_negative(
    w, ds: LabeledDataset, anchor_idx: int, pool_size: int, rng: np.random.Generator
) -> int:
    """Hardest negative by projected similarity.

    Draws ``pool_size`` different-class row indices uniformly with replacement
    (one vectorized RNG call) and returns the candidate maximizing
    ``(W a).(W n)``; ties go to the earliest draw.
    """
    w = _check_projection_dims(w, ds)
    candidates = _draw_pool(ds, anchor_idx, pool_size, rng)
    u = w.T @ (w @ ds.features[anchor_idx])
    uniq, inv = np.unique(candidates, return_inverse=True)
    scores = (ds.features[uniq] @ u)[inv]
    return int(candidates[int(np.argmax(scores))])


def mine_hard_negative_distance(
    w, ds: LabeledDataset, anchor_idx: int, pool_size: int, rng: np.random.Generator
) -> int:
    """Hardest negative by projected distance: minimizes ``||W(a - n)||^2``.

    Same pool semantics and tie-breaking as :func:`mine_hard_negative`.
    """
    w = _check_projection_dims(w, ds)
    candidates = _draw_pool(ds, anchor_idx, pool_size, rng)
    pa = w @ ds.features[anchor_idx]
    uniq, inv = np.unique(candidates, return_inverse=True)
    diffs = ds.features[uniq] @ w.T - pa
    crit = np.einsum("ij,ij->i", diffs, diffs)[inv]
    return int(candidates[int(np.argmin(crit))])


def train_tse(ds: LabeledDataset, cfg: TrainConfig) -> tuple[np.ndarray, TrainReport]:
    """Learn W by SGD on the similarity hinge, starting from PCA."""
    return _train(ds, cfg, distance_objective=False)


def train_tde(ds: LabeledDataset, cfg: TrainConfig) -> tuple[np.ndarray, TrainReport]:
    """Learn W by SGD on the squared-distance hinge, starting from PCA.

    Identical harness to :func:`train_tse`; mining picks the pool candidate
    with the smallest projected distance to the anchor.
    """
    return _train(ds, cfg, distance_objective=True)


def _train(ds: LabeledDataset, cfg: TrainConfig, distance_objective: bool):
    tables = _SamplingTables(ds)
    if tables.num_labels < 2:
        raise NoNegativesError("triplet training needs at least 2 distinct labels")
    if tables.eligible_anchors.size == 0:
        raise NoValidAnchorError("triplet training needs a class with >= 2 samples")

    w = pca_init(ds, cfg.d_out)
    rng = np.random.default_rng(cfg.seed)
    x = ds.features
    labels = ds.labels

    # Hot-loop caches. Projected rows evolve under the same rank-2 structure
    # as W and are recomputed periodically to kill fp drift; the feature Gram
    # matrix removes every full-width matvec from the loop. Mining and the
    # violation gate read these caches; the W update itself is always the
    # exact update op applied to the dataset rows.
    gram = x @ x.T if ds.num_samples <= _GRAM_MAX_ROWS else None
    proj = x @ w.T
    sq = np.zeros(ds.num_samples)
    sq_dirty = True

    def feature_dots(i: int) -> np.ndarray:
        return gram[i] if gram is not None else x @ x[i]

    pleft = np.empty((ds.num_samples, 2))
    pright = np.empty((2, cfg.d_out))
    pdelta = np.empty((ds.num_samples, cfg.d_out))

    violations = 0
    trace: list[tuple[int, float]] = []
    window_sum = 0.0
    window_len = 0

    for t in range(cfg.max_iter):
        if t and t % _REPROJECT_EVERY == 0:
            proj = x @ w.T
            sq_dirty = True
        a, p = tables.sample_anchor_positive(rng)
        negatives = tables.negatives_of(int(labels[a]))
        candidates = negatives[rng.integers(0, negatives.size, size=cfg.negative_pool)]
        sims = proj @ proj[a]

        if distance_objective:
            if sq_dirty:
                sq = np.einsum("ij,ij->i", proj, proj)
                sq_dirty = False
            crit = sq[candidates] - 2.0 * sims[candidates]
            n = int(candidates[int(np.argmin(crit))])
            # alpha + ||W(a-p)||^2 - ||W(a-n)||^2 from the cached projections
            margin_gap = cfg.alpha + (sq[p] - sq[n]) - 2.0 * (sims[p] - sims[n])
            if margin_gap > 0.0:
                pright[0] = proj[a]
                pright[0] -= proj[p]  # W(a-p)
                pright[1] = proj[n]
                pright[1] -= proj[a]  # -W(a-n)
                w = tde_update(w, x[a], x[p], x[n], cfg.eta)
                ga = feature_dots(a)
                pleft[:, 0] = ga
                pleft[:, 0] -= feature_dots(p)  # X(a-p)
                pleft[:, 1] = ga
                pleft[:, 1] -= feature_dots(n)  # X(a-n)
                np.dot(pleft, pright, out=pdelta)
                pdelta *= 2.0 * cfg.eta
                proj -= pdelta
                sq_dirty = True
                violations += 1
        else:
            n = int(candidates[int(np.argmax(sims[candidates]))])
            # alpha + (Wa).(Wn) - (Wa).(Wp) from the cached projections
            margin_gap = cfg.alpha + sims[n] - sims[p]
            if margin_gap > 0.0:
                pright[0] = proj[a]  # Wa, captured before proj changes
                pright[1] = proj[n]
                pright[1] -= proj[p]  # W(n-p)
                w = tse_update(w, x[a], x[p], x[n], cfg.eta)
                pleft[:, 0] = feature_dots(n)
                pleft[:, 0] -= feature_dots(p)  # X(n-p)
                pleft[:, 1] = feature_dots(a)
                np.dot(pleft, pright, out=pdelta)
                pdelta *= cfg.eta
                proj -= pdelta
                violations += 1

        window_sum += margin_gap if margin_gap > 0.0 else 0.0
        window_len += 1
        if window_len == _TRACE_WINDOW:
            trace.append((t + 1, window_sum / window_len))
            window_sum = 0.0
            window_len = 0

    if window_len:
        trace.append((cfg.max_iter, window_sum / window_len))

    report = TrainReport(
        iterations_run=cfg.max_iter,
        violations_updated=violations,
        loss_trace=tuple(trace),
    )
    return w, report
