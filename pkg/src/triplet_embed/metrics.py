"""Verification metrics: ROC sweeps, TAR at fixed FAR, and equal error rate.

The decision rule everywhere is "accept if score >= threshold". The ROC is
swept over every distinct score, so FAR/TAR values are exact empirical
fractions; TAR@FAR and EER interpolate linearly on the resulting curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyScoresError, NonFiniteError, ValidationError


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """Genuine and impostor similarity scores from a verification protocol."""

    genuine: np.ndarray
    impostor: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.genuine, dtype=np.float64)
        i = np.asarray(self.impostor, dtype=np.float64)
        if g.ndim != 1 or i.ndim != 1:
            raise ValidationError("score lists must be 1-D")
        object.__setattr__(self, "genuine", g)
        object.__setattr__(self, "impostor", i)


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Operating points sorted by FAR ascending (TAR non-decreasing)."""

    far: np.ndarray
    tar: np.ndarray

    def __post_init__(self):
        far = np.asarray(self.far, dtype=np.float64)
        tar = np.asarray(self.tar, dtype=np.float64)
        if far.shape != tar.shape or far.ndim != 1 or far.size < 2:
            raise ValidationError("curve needs matching 1-D far/tar arrays (>= 2 points)")
        object.__setattr__(self, "far", far)
        object.__setattr__(self, "tar", tar)

    def envelope(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique FAR values with the best TAR achieved at each."""
        uniq = np.unique(self.far)
        last = np.searchsorted(self.far, uniq, side="right") - 1
        return uniq, self.tar[last]


def roc(scores: ScoreSet) -> RocCurve:
    """Sweep thresholds over all distinct scores, highest first.

    The curve starts at (0, 0) (threshold above every score) and ends at
    (1, 1) (threshold at the minimum score accepts everything).
    """
    g = scores.genuine
    imp = scores.impostor
    if g.size == 0 or imp.size == 0:
        raise EmptyScoresError(
            f"ROC needs non-empty score lists, got {g.size} genuine / {imp.size} impostor"
        )
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(imp))):
        raise NonFiniteError("scores contain NaN or infinite entries")

    thresholds = np.unique(np.concatenate([g, imp]))[::-1]
    g_sorted = np.sort(g)
    i_sorted = np.sort(imp)
    tar = (g.size - np.searchsorted(g_sorted, thresholds, side="left")) / g.size
    far = (imp.size - np.searchsorted(i_sorted, thresholds, side="left")) / imp.size
    far = np.concatenate([[0.0], far])
    tar = np.concatenate([[0.0], tar])

    keep = np.ones(far.size, dtype=bool)
    keep[1:] = (np.diff(far) != 0.0) | (np.diff(tar) != 0.0)
    return RocCurve(far[keep], tar[keep])


def tar_at_far(curve: RocCurve, far_target: float) -> float:
    """TAR at the target FAR, linearly interpolated (clamped at endpoints)."""
    fu, tu = curve.envelope()
    return float(np.interp(far_target, fu, tu))


def eer(curve: RocCurve) -> float:
    """Equal error rate: the FAR value where FAR = 1 - TAR on the curve.

    Found by linear interpolation on the piecewise-linear upper envelope;
    ``far + tar - 1`` is non-decreasing along it, so the crossing is unique.
    """
    fu, tu = curve.envelope()
    gap = fu + tu - 1.0
    k = int(np.searchsorted(gap >= 0.0, True))
    if k == 0:
        return float(fu[0])
    if k >= fu.size:  # pragma: no cover - curve always reaches (1, 1)
        return float(fu[-1])
    f0, f1 = fu[k - 1], fu[k]
    t0, t1 = tu[k - 1], tu[k]
    slope = (t1 - t0) / (f1 - f0)
    crossing = (1.0 - t0 + slope * f0) / (1.0 + slope)
    return float(min(max(crossing, 0.0), 1.0))
