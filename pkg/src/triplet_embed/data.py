"""Datasets of unit-norm feature vectors, templates, pair protocols, and file I/O.

On-disk formats
---------------
Binary feature file
    magic ``TSE1``, row count N (u32 LE), dimension d (u32 LE), then N*d
    IEEE-754 float32 LE values, row-major.
Binary matrix file
    magic ``TSEW``, d_out (u32 LE), d_in (u32 LE), then d_out*d_in float32 LE
    values, row-major.
CSV feature file
    one comma-separated row of decimal floats per vector, no header.
Labels file
    plain text, one decimal integer per line, exactly N lines.
Template map file
    one line per template: ``<template_id>:<idx>,<idx>,...``.
Pair protocol file
    one line per pair: ``<template_id_a>,<template_id_b>,<0|1>`` (1 = genuine).

In-memory feature matrices are float64 whose values lie exactly on the
float32 grid, so binary save -> load round-trips are bit identities.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DataFormatError,
    DimensionError,
    DimensionMismatchError,
    LabelCountMismatchError,
    NonFiniteError,
    TruncatedFileError,
    ValidationError,
    ZeroVectorError,
)

UNIT_NORM_ATOL = 1e-6
ZERO_NORM_FLOOR = 1e-12

FEATURE_MAGIC = b"TSE1"
MATRIX_MAGIC = b"TSEW"
_HEADER = struct.Struct("<4sII")


def normalize_unit(values) -> np.ndarray:
    """Scale a vector to unit Euclidean norm.

    Args:
        values: 1-D array-like of finite reals.

    Returns:
        float64 vector ``values / ||values||_2``.

    Raises:
        NonFiniteError: any entry is NaN or infinite.
        ZeroVectorError: the norm is below 1e-12.
    """
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise NonFiniteError("vector contains NaN or infinite entries")
    norm = float(np.linalg.norm(vec))
    if norm < ZERO_NORM_FLOOR:
        raise ZeroVectorError(f"vector norm {norm:.3e} is below {ZERO_NORM_FLOOR:.0e}")
    return vec / norm


def _quantize(values: np.ndarray) -> np.ndarray:
    """Round float64 values to the float32 grid (the storage precision)."""
    return values.astype("<f4").astype(np.float64)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """N unit-norm feature rows with integer class labels.

    The constructor validates; it does not modify data. Use
    :meth:`from_raw` to build a dataset from unnormalized vectors.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        if features.ndim != 2:
            raise DimensionError(f"features must be 2-D, got shape {features.shape}")
        if features.shape[1] < 2:
            raise DimensionError(f"feature dimension must be >= 2, got {features.shape[1]}")
        if not np.all(np.isfinite(features)):
            raise NonFiniteError("features contain NaN or infinite entries")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ValidationError(
                f"labels must be one per row: {labels.shape} vs {features.shape[0]} rows"
            )
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            raise ValidationError(f"labels must be integers, got dtype {labels.dtype}")
        labels = labels.astype(np.int64)
        if labels.size and labels.min() < 0:
            raise ValidationError("labels must be non-negative")
        norms = np.linalg.norm(features, axis=1)
        if norms.size and np.max(np.abs(norms - 1.0)) > UNIT_NORM_ATOL:
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise ValidationError(
                f"row {bad} has norm {norms[bad]:.8f}; rows must be unit "
                f"(use LabeledDataset.from_raw to normalize)"
            )
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_raw(cls, features, labels) -> "LabeledDataset":
        """Normalize rows to unit length and quantize to storage precision."""
        arr = np.asarray(features, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionError(f"features must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("features contain NaN or infinite entries")
        norms = np.linalg.norm(arr, axis=1)
        if norms.size and norms.min() < ZERO_NORM_FLOOR:
            raise ZeroVectorError(f"row {int(np.argmin(norms))} has (near-)zero norm")
        return cls(_quantize(arr / norms[:, None]), labels)

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def distinct_labels(self) -> np.ndarray:
        return np.unique(self.labels)


def subset(ds: LabeledDataset, indices) -> LabeledDataset:
    """New dataset holding the given rows (bitwise-preserved) in the given order."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= ds.num_samples):
        raise ValidationError("subset indices out of range")
    return LabeledDataset(ds.features[idx].copy(), ds.labels[idx].copy())


@dataclass(frozen=True)
class Template:
    """A comparison unit: one or more row indices into a dataset."""

    template_id: int
    member_indices: tuple[int, ...]

    def __post_init__(self):
        members = tuple(int(i) for i in self.member_indices)
        if not members:
            raise ValidationError(f"template {self.template_id} has no members")
        if min(members) < 0:
            raise ValidationError(f"template {self.template_id} has a negative index")
        object.__setattr__(self, "template_id", int(self.template_id))
        object.__setattr__(self, "member_indices", members)


@dataclass(frozen=True)
class Pair:
    """One protocol comparison between two template ids."""

    template_a: int
    template_b: int
    genuine: bool


def flatten_template(template: Template, ds: LabeledDataset) -> np.ndarray:
    """Average a template's member rows and return a unit-norm vector.

    Member indices are averaged in sorted order so the result is exactly
    invariant to permutations of ``member_indices``. When the mean is already
    unit-norm within tolerance (in particular for single-member templates) it
    is returned unchanged, bit for bit.

    Raises:
        ValidationError: a member index is out of range.
        ZeroVectorError: the members cancel (mean norm below 1e-12).
    """
    idx = np.asarray(sorted(template.member_indices), dtype=np.int64)
    if idx.max() >= ds.num_samples:
        raise ValidationError(
            f"template {template.template_id} references row {int(idx.max())} "
            f"but the dataset has {ds.num_samples} rows"
        )
    mean = ds.features[idx].mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < ZERO_NORM_FLOOR:
        raise ZeroVectorError(
            f"template {template.template_id}: member vectors cancel (mean norm {norm:.3e})"
        )
    if abs(norm - 1.0) <= UNIT_NORM_ATOL:
        return mean
    return mean / norm


# ---------------------------------------------------------------------------
# Feature and matrix files


def save_features(ds: LabeledDataset, features_path, labels_path, fmt: str = "binary") -> None:
    """Write a dataset as a feature file plus a labels file."""
    features_path = Path(features_path)
    labels_path = Path(labels_path)
    if fmt == "binary":
        header = _HEADER.pack(FEATURE_MAGIC, ds.num_samples, ds.dim)
        features_path.write_bytes(header + ds.features.astype("<f4").tobytes())
    elif fmt == "csv":
        # %.9g round-trips float32 values exactly through decimal text.
        np.savetxt(features_path, ds.features, fmt="%.9g", delimiter=",")
    else:
        raise ValidationError(f"unknown feature format {fmt!r}")
    labels_path.write_text("".join(f"{int(v)}\n" for v in ds.labels))


def load_features(features_path, labels_path, fmt: str = "binary") -> LabeledDataset:
    """Read a feature file and its labels file into a LabeledDataset.

    Rows are kept bit-exact when already unit-norm within tolerance and are
    renormalized otherwise, so loading the output of :func:`save_features` is
    an identity.

    Raises:
        BadMagicError, TruncatedFileError, DimensionMismatchError,
        LabelCountMismatchError, DataFormatError, OSError.
    """
    features_path = Path(features_path)
    if fmt == "binary":
        raw = _read_binary_payload(features_path, FEATURE_MAGIC)
    elif fmt == "csv":
        raw = _read_csv_features(features_path)
    else:
        raise ValidationError(f"unknown feature format {fmt!r}")
    labels = _load_labels(labels_path, raw.shape[0])
    return _dataset_from_stored(raw, labels, features_path)


def _read_binary_payload(path: Path, magic: bytes) -> np.ndarray:
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise TruncatedFileError(f"{path}: shorter than the {_HEADER.size}-byte header")
    got_magic, rows, cols = _HEADER.unpack_from(blob)
    if got_magic != magic:
        raise BadMagicError(f"{path}: magic {got_magic!r}, expected {magic!r}")
    if cols < 2:
        raise DimensionMismatchError(f"{path}: dimension {cols} in header must be >= 2")
    expected = rows * cols * 4
    body = blob[_HEADER.size:]
    if len(body) != expected:
        raise TruncatedFileError(
            f"{path}: header promises {rows} rows x {cols} cols "
            f"({expected} payload bytes), found {len(body)}"
        )
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).astype(np.float64)


def _read_csv_features(path: Path) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            values = [float(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise DimensionMismatchError(
                f"{path}:{lineno}: row has {len(values)} values, expected {width}"
            )
        rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: no feature rows")
    if width < 2:
        raise DimensionMismatchError(f"{path}: dimension {width} must be >= 2")
    return np.asarray(rows, dtype=np.float64)


def _load_labels(path, expected: int) -> np.ndarray:
    path = Path(path)
    lines = path.read_text().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) != expected:
        raise LabelCountMismatchError(
            f"{path}: {len(lines)} labels for {expected} feature rows"
        )
    try:
        values = [int(ln.strip()) for ln in lines]
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if values and min(values) < 0:
        raise DataFormatError(f"{path}: labels must be non-negative")
    return np.asarray(values, dtype=np.int64)


def _dataset_from_stored(raw: np.ndarray, labels: np.ndarray, path: Path) -> LabeledDataset:
    arr = _quantize(raw)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{path}: features contain NaN or infinite entries")
    norms = np.linalg.norm(arr, axis=1)
    if norms.size and norms.min() < ZERO_NORM_FLOOR:
        raise ZeroVectorError(f"{path}: row {int(np.argmin(norms))} has (near-)zero norm")
    off = np.abs(norms - 1.0) > UNIT_NORM_ATOL
    if np.any(off):
        arr = arr.copy()
        arr[off] = _quantize(arr[off] / norms[off, None])
    return LabeledDataset(arr, labels)


def save_matrix(w, path) -> None:
    """Write an embedding matrix (d_out x d_in, d_out < d_in) in binary form."""
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"matrix must be 2-D, got shape {arr.shape}")
    d_out, d_in = arr.shape
    if d_out < 1 or d_out >= d_in:
        raise DimensionError(f"matrix must be d_out x d_in with d_out < d_in, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("matrix contains NaN or infinite entries")
    header = _HEADER.pack(MATRIX_MAGIC, d_out, d_in)
    Path(path).write_bytes(header + arr.astype("<f4").tobytes())


def load_matrix(path) -> np.ndarray:
    """Read an embedding matrix written by :func:`save_matrix`."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise TruncatedFileError(f"{path}: shorter than the {_HEADER.size}-byte header")
    got_magic, d_out, d_in = _HEADER.unpack_from(blob)
    if got_magic != MATRIX_MAGIC:
        raise BadMagicError(f"{path}: magic {got_magic!r}, expected {MATRIX_MAGIC!r}")
    if d_out < 1 or d_out >= d_in:
        raise DimensionMismatchError(
            f"{path}: header dims {d_out} x {d_in} must satisfy 1 <= d_out < d_in"
        )
    expected = d_out * d_in * 4
    body = blob[_HEADER.size:]
    if len(body) != expected:
        raise TruncatedFileError(
            f"{path}: header promises {expected} payload bytes, found {len(body)}"
        )
    arr = np.frombuffer(body, dtype="<f4").reshape(d_out, d_in).astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{path}: matrix contains NaN or infinite entries")
    return arr


# ---------------------------------------------------------------------------
# Template maps and pair protocols


def save_templates(templates: dict[int, Template], path) -> None:
    lines = []
    for tid in sorted(templates):
        t = templates[tid]
        lines.append(f"{tid}:{','.join(str(i) for i in t.member_indices)}\n")
    Path(path).write_text("".join(lines))


def load_templates(path) -> dict[int, Template]:
    """Parse a template map file into ``{template_id: Template}``."""
    path = Path(path)
    templates: dict[int, Template] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise DataFormatError(f"{path}:{lineno}: expected '<id>:<idx>,...'")
        try:
            tid = int(head.strip())
            members = tuple(int(tok) for tok in tail.split(","))
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if tid in templates:
            raise DataFormatError(f"{path}:{lineno}: duplicate template id {tid}")
        try:
            templates[tid] = Template(tid, members)
        except ValidationError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return templates


def save_pairs(pairs: list[Pair], path) -> None:
    Path(path).write_text(
        "".join(f"{p.template_a},{p.template_b},{1 if p.genuine else 0}\n" for p in pairs)
    )


def load_pairs(path) -> list[Pair]:
    """Parse a pair protocol file. Duplicate lines yield duplicate pairs."""
    path = Path(path)
    pairs: list[Pair] = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise DataFormatError(f"{path}:{lineno}: expected '<id_a>,<id_b>,<0|1>'")
        flag = fields[2].strip()
        if flag not in ("0", "1"):
            raise DataFormatError(f"{path}:{lineno}: genuine flag must be 0 or 1, got {flag!r}")
        try:
            pairs.append(Pair(int(fields[0]), int(fields[1]), flag == "1"))
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return pairs
