"""Principal-component initialization of the embedding matrix."""

from __future__ import annotations

import numpy as np

from .data import LabeledDataset
from .errors import DimensionError, InsufficientDataError


def pca_decomposition(ds: LabeledDataset, d_out: int) -> tuple[np.ndarray, np.ndarray]:
    """Top principal components of the dataset and their eigenvalues.

    The reference semantics is an eigendecomposition of the sample covariance
    (denominator N-1) of the mean-centered feature rows. Rows of the returned
    matrix are the leading eigenvectors ordered by descending eigenvalue
    (stable under ties), each flipped so its first nonzero entry is positive.

    Returns:
        (W, eigenvalues): W is d_out x d_in with orthonormal rows;
        eigenvalues has length d_out, non-increasing.
    """
    n, d_in = ds.features.shape
    if d_out < 1:
        raise DimensionError(f"d_out must be >= 1, got {d_out}")
    if d_out >= d_in:
        raise DimensionError(f"d_out ({d_out}) must be smaller than d_in ({d_in})")
    if n <= d_out:
        raise InsufficientDataError(f"need more than d_out={d_out} samples, got {n}")

    centered = ds.features - ds.features.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(-eigvals, kind="stable")[:d_out]
    components = eigvecs[:, order].T.copy()
    for row in components:
        nz = np.flatnonzero(row)
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return components, eigvals[order]


def pca_init(ds: LabeledDataset, d_out: int) -> np.ndarray:
    """Initial embedding: the first ``d_out`` principal components as rows."""
    components, _ = pca_decomposition(ds, d_out)
    return components


def project(w: np.ndarray, x) -> np.ndarray:
    """Apply the linear map: ``w @ x``. No centering, no renormalization."""
    w = np.asarray(w, dtype=np.float64)
    vec = np.asarray(x, dtype=np.float64)
    if w.ndim != 2:
        raise DimensionError(f"matrix must be 2-D, got shape {w.shape}")
    if vec.ndim != 1 or vec.shape[0] != w.shape[1]:
        raise DimensionError(f"cannot project shape {vec.shape} through {w.shape}")
    return w @ vec
