"""Template scoring, verification protocols, and closed-set identification.

``w=None`` everywhere means the identity map: templates are scored on the raw
(flattened) features. That is the baseline the learned embeddings are
compared against.
"""

from __future__ import annotations

import numpy as np

from .data import LabeledDataset, Pair, Template, flatten_template
from .errors import (
    DimensionError,
    EmptyGalleryError,
    EmptyProbeSetError,
    UnknownTemplateError,
    ValidationError,
    ZeroProjectionError,
)
from .metrics import ScoreSet, eer, roc, tar_at_far

DEFAULT_FAR_TARGETS = (1e-4, 1e-3, 1e-2, 1e-1)

_MODES = ("inner", "cosine")


def _check_mode(mode: str) -> str:
    if mode not in _MODES:
        raise ValidationError(f"mode must be one of {_MODES}, got {mode!r}")
    return mode


def score_pair(w, x, y, mode: str = "inner") -> float:
    """Similarity of two feature vectors under the map ``w``.

    ``inner`` is ``(Wx).(Wy)``; ``cosine`` divides by the projected norms and
    raises :class:`ZeroProjectionError` if either projection is zero.
    """
    _check_mode(mode)
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise DimensionError(f"vectors must share one 1-D shape, got {xv.shape} and {yv.shape}")
    if w is not None:
        w = np.asarray(w, dtype=np.float64)
        if w.ndim != 2 or w.shape[1] != xv.shape[0]:
            raise DimensionError(f"matrix shape {w.shape} does not match vectors {xv.shape}")
        xv = w @ xv
        yv = w @ yv
    raw = float(xv @ yv)
    if mode == "inner":
        return raw
    nx = float(np.linalg.norm(xv))
    ny = float(np.linalg.norm(yv))
    if nx == 0.0 or ny == 0.0:
        raise ZeroProjectionError("cosine similarity undefined for a zero projection")
    return raw / (nx * ny)


def _projected_templates(
    w, ids, templates: dict[int, Template], ds: LabeledDataset
) -> dict[int, np.ndarray]:
    if w is not None:
        w = np.asarray(w, dtype=np.float64)
        if w.ndim != 2 or w.shape[1] != ds.dim:
            raise DimensionError(f"matrix shape {w.shape} does not match feature dim {ds.dim}")
    out: dict[int, np.ndarray] = {}
    for tid in ids:
        template = templates.get(tid)
        if template is None:
            raise UnknownTemplateError(f"pair protocol references undefined template {tid}")
        vec = flatten_template(template, ds)
        out[tid] = vec if w is None else w @ vec
    return out


def score_protocol(
    w, pairs: list[Pair], templates: dict[int, Template], ds: LabeledDataset, mode: str = "inner"
) -> ScoreSet:
    """Score every protocol pair on flattened templates.

    Each referenced template is flattened and projected once. Duplicate pair
    lines produce duplicate scores. Scores land in the genuine or impostor
    list according to the pair's flag.
    """
    _check_mode(mode)
    referenced = {p.template_a for p in pairs} | {p.template_b for p in pairs}
    projected = _projected_templates(w, sorted(referenced), templates, ds)
    norms = {tid: float(np.linalg.norm(v)) for tid, v in projected.items()}

    genuine: list[float] = []
    impostor: list[float] = []
    for pair in pairs:
        va = projected[pair.template_a]
        vb = projected[pair.template_b]
        score = float(va @ vb)
        if mode == "cosine":
            na, nb = norms[pair.template_a], norms[pair.template_b]
            if na == 0.0 or nb == 0.0:
                raise ZeroProjectionError(
                    f"cosine undefined: zero projection in pair "
                    f"({pair.template_a}, {pair.template_b})"
                )
            score /= na * nb
        (genuine if pair.genuine else impostor).append(score)
    return ScoreSet(np.asarray(genuine), np.asarray(impostor))


def template_subject(template: Template, ds: LabeledDataset) -> int:
    """The class label shared by all template members (mixed labels are invalid)."""
    idx = np.asarray(template.member_indices, dtype=np.int64)
    if idx.max() >= ds.num_samples:
        raise ValidationError(
            f"template {template.template_id} references row {int(idx.max())} "
            f"but the dataset has {ds.num_samples} rows"
        )
    labels = np.unique(ds.labels[idx])
    if labels.size != 1:
        raise ValidationError(
            f"template {template.template_id} mixes labels {labels.tolist()}"
        )
    return int(labels[0])


def identify(
    w,
    gallery_templates: dict[int, Template],
    probe_templates: dict[int, Template],
    ds: LabeledDataset,
    k_list=(1, 5),
    mode: str = "cosine",
) -> dict[int, float]:
    """Closed-set rank-k identification accuracies.

    Probes whose subject has no gallery template are dropped before scoring.
    For each remaining probe, gallery templates are ranked by score descending
    with ties broken by ascending gallery template id; the probe counts as a
    rank-k hit if a gallery template of its subject sits in the top k.
    """
    _check_mode(mode)
    ks = [int(k) for k in k_list]
    if not ks or min(ks) < 1:
        raise ValidationError(f"k_list must contain positive ranks, got {k_list!r}")
    if not gallery_templates:
        raise EmptyGalleryError("identification needs a non-empty gallery")

    gallery_ids = sorted(gallery_templates)
    gallery_vecs = _projected_templates(w, gallery_ids, gallery_templates, ds)
    gallery_mat = np.stack([gallery_vecs[tid] for tid in gallery_ids])
    gallery_subjects = np.asarray(
        [template_subject(gallery_templates[tid], ds) for tid in gallery_ids]
    )
    known = set(gallery_subjects.tolist())

    probe_ids = [
        tid
        for tid in sorted(probe_templates)
        if template_subject(probe_templates[tid], ds) in known
    ]
    if not probe_ids:
        raise EmptyProbeSetError("no probe subject appears in the gallery")
    probe_vecs = _projected_templates(w, probe_ids, probe_templates, ds)
    probe_mat = np.stack([probe_vecs[tid] for tid in probe_ids])
    probe_subjects = np.asarray([template_subject(probe_templates[tid], ds) for tid in probe_ids])

    scores = probe_mat @ gallery_mat.T
    if mode == "cosine":
        gn = np.linalg.norm(gallery_mat, axis=1)
        pn = np.linalg.norm(probe_mat, axis=1)
        if np.any(gn == 0.0) or np.any(pn == 0.0):
            raise ZeroProjectionError("cosine undefined: a template projects to zero")
        scores = scores / (pn[:, None] * gn[None, :])

    # stable argsort on -scores keeps ascending-template-id order among ties
    order = np.argsort(-scores, axis=1, kind="stable")
    ranked_subjects = gallery_subjects[order]
    hits = ranked_subjects == probe_subjects[:, None]
    first_hit = np.argmax(hits, axis=1) + 1  # every probe has a gallery mate
    return {k: float(np.mean(first_hit <= k)) for k in ks}


def verification_metrics(scores: ScoreSet, far_targets=DEFAULT_FAR_TARGETS) -> dict:
    """EER plus TAR at each requested FAR, from one ROC sweep."""
    curve = roc(scores)
    return {
        "eer": eer(curve),
        "tar_at_far": {float(t): tar_at_far(curve, float(t)) for t in far_targets},
    }


# ---------------------------------------------------------------------------
# Protocol construction helpers (synthetic experiments, CLI pipeline)


def holdout_split(ds: LabeledDataset, holdout_per_class: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic split: the last ``holdout_per_class`` rows of every class
    are held out. Returns (train_indices, holdout_indices), both ascending.
    """
    if holdout_per_class < 1:
        raise ValidationError(f"holdout_per_class must be >= 1, got {holdout_per_class}")
    train: list[np.ndarray] = []
    held: list[np.ndarray] = []
    for label in np.unique(ds.labels):
        rows = np.flatnonzero(ds.labels == label)
        if rows.size <= holdout_per_class:
            raise ValidationError(
                f"class {int(label)} has {rows.size} samples; cannot hold out {holdout_per_class}"
            )
        train.append(rows[:-holdout_per_class])
        held.append(rows[-holdout_per_class:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(held))


def singleton_templates(ds: LabeledDataset) -> dict[int, Template]:
    """One template per dataset row; template id = row index."""
    return {i: Template(i, (i,)) for i in range(ds.num_samples)}


def class_templates(ds: LabeledDataset, indices=None) -> dict[int, Template]:
    """One template per class covering the given rows (default: all rows);
    template id = class label.
    """
    idx = np.arange(ds.num_samples) if indices is None else np.asarray(indices, dtype=np.int64)
    out: dict[int, Template] = {}
    for label in np.unique(ds.labels[idx]):
        members = idx[ds.labels[idx] == label]
        out[int(label)] = Template(int(label), tuple(int(i) for i in members))
    return out


def all_pairs_protocol(templates: dict[int, Template], ds: LabeledDataset) -> list[Pair]:
    """Every unordered template pair, flagged genuine when subjects match."""
    ids = sorted(templates)
    subjects = {tid: template_subject(templates[tid], ds) for tid in ids}
    pairs: list[Pair] = []
    for i, ta in enumerate(ids):
        for tb in ids[i + 1:]:
            pairs.append(Pair(ta, tb, subjects[ta] == subjects[tb]))
    return pairs
