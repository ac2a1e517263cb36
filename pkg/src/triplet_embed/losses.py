"""Triplet hinge losses and their exact SGD updates.

Two objectives over a linear map W, both with margin ``alpha``:

* similarity form (TSE): ``max(0, alpha + (Wa).(Wn) - (Wa).(Wp))``
* squared-distance form (TDE): ``max(0, alpha + ||W(a-p)||^2 - ||W(a-n)||^2)``

The update functions subtract ``eta`` times the exact gradient of the active
hinge; callers only apply them when the corresponding loss is positive.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError


def _as_triplet(w, anchor, positive, negative):
    w = np.asarray(w, dtype=np.float64)
    a = np.asarray(anchor, dtype=np.float64)
    p = np.asarray(positive, dtype=np.float64)
    n = np.asarray(negative, dtype=np.float64)
    if w.ndim != 2:
        raise DimensionError(f"matrix must be 2-D, got shape {w.shape}")
    for name, v in (("anchor", a), ("positive", p), ("negative", n)):
        if v.ndim != 1 or v.shape[0] != w.shape[1]:
            raise DimensionError(
                f"{name} has shape {v.shape}, expected ({w.shape[1]},) for matrix {w.shape}"
            )
    return w, a, p, n


def tse_loss(w, anchor, positive, negative, alpha: float) -> float:
    """Similarity hinge: ``max(0, alpha + (Wa).(Wn) - (Wa).(Wp))``."""
    w, a, p, n = _as_triplet(w, anchor, positive, negative)
    wa = w @ a
    return max(0.0, float(alpha + wa @ (w @ n) - wa @ (w @ p)))


def tse_update(w, anchor, positive, negative, eta: float) -> np.ndarray:
    """One SGD step on the active similarity hinge.

    Returns ``W - eta * W (a(n-p)^T + (n-p)a^T)``, which equals
    ``W - eta * (Wa)(n-p)^T - eta * (W(n-p))a^T``; the rank-2 product is
    evaluated as one stacked matrix multiply.
    """
    w, a, p, n = _as_triplet(w, anchor, positive, negative)
    d = n - p
    left = np.stack([w @ a, w @ d], axis=1)
    right = np.stack([d, a], axis=0)
    delta = left @ right
    delta *= eta
    return w - delta


def tde_loss(w, anchor, positive, negative, alpha: float) -> float:
    """Squared-distance hinge: ``max(0, alpha + ||W(a-p)||^2 - ||W(a-n)||^2)``."""
    w, a, p, n = _as_triplet(w, anchor, positive, negative)
    wp = w @ (a - p)
    wn = w @ (a - n)
    return max(0.0, float(alpha + wp @ wp - wn @ wn))


def tde_update(w, anchor, positive, negative, eta: float) -> np.ndarray:
    """One SGD step on the active squared-distance hinge.

    Returns ``W - 2 eta W ((a-p)(a-p)^T - (a-n)(a-n)^T)``.
    """
    w, a, p, n = _as_triplet(w, anchor, positive, negative)
    dp = a - p
    dn = a - n
    if np.array_equal(dp, dn):  # the outer products cancel exactly
        return w.copy()
    left = np.stack([w @ dp, w @ dn], axis=1)
    right = np.stack([dp, -dn], axis=0)
    delta = left @ right
    delta *= 2.0 * eta
    return w - delta
