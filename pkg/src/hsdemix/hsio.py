"""Hyperspectral cube ingestion, unfolding and normalization.

Interchange formats
-------------------
* Cube: ``<name>.f32`` (little-endian float32 payload, band-fastest) next to
  ``<name>.json`` with fields ``n``, ``m``, ``f`` and ``order: "row-major"``.
* Matrix CSV: one row per line, decimal reals, no header.
* Mask CSV: n*m integer class labels, one per line, in unfolding order.

The unfolded data matrix is ``f x nm``; column ``j = row*m + col`` holds the
spectrum of pixel ``(row, col)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, FormatError, SizeError, ShapeError

CUBE_ORDER = "row-major"


@dataclass
class HsCube:
    """An n x m x f reflectance stack, indexed (row, col, band)."""

    values: np.ndarray
    band_wavelengths: list[float] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 3:
            raise ShapeError(f"cube values must be 3-D, got ndim={self.values.ndim}")
        if min(self.values.shape) < 1:
            raise ShapeError(f"cube dims must be >= 1, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DegenerateInputError("cube contains non-finite entries")
        if self.band_wavelengths is not None and len(self.band_wavelengths) != self.f:
            raise SizeError(
                f"band_wavelengths length {len(self.band_wavelengths)} != f={self.f}"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def f(self) -> int:
        return self.values.shape[2]


@dataclass
class GroundTruthMask:
    """Binary labels over voxels, in unfolding order."""

    labels: np.ndarray
    positive_class_id: int = 16

    def __post_init__(self):
        self.labels = np.asarray(self.labels).ravel()
        bad = set(np.unique(self.labels)) - {0, 1}
        if bad:
            raise FormatError(f"mask labels must be binary, found {sorted(bad)}")

    @property
    def n_positive(self) -> int:
        return int(self.labels.sum())

    @property
    def positive_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 1)


def load_cube(path, format: str = "raw-f32+json-header") -> HsCube:
    """Load a cube from ``<path>.f32``/``<path>.json`` or CSV + JSON header.

    ``path`` may carry or omit the payload extension; the sidecar header is
    always ``<stem>.json``.
    """
    base = Path(path)
    if base.suffix in (".f32", ".csv", ".json"):
        base = base.with_suffix("")
    header_path = base.with_suffix(".json")
    if not header_path.exists():
        raise FormatError(f"missing header file {header_path}")
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"header is not valid JSON: {e}") from e

    for key in ("n", "m", "f"):
        if key not in header:
            raise FormatError(f"header missing field '{key}'")
        if not isinstance(header[key], int) or header[key] < 1:
            raise FormatError(f"header field '{key}' must be a positive integer")
    if header.get("order", CUBE_ORDER) != CUBE_ORDER:
        raise FormatError(f"header field 'order' must be '{CUBE_ORDER}'")
    n, m, f = header["n"], header["m"], header["f"]

    if format == "raw-f32+json-header":
        payload_path = base.with_suffix(".f32")
        raw = np.fromfile(payload_path, dtype="<f4")
        if raw.size != n * m * f:
            raise SizeError(
                f"payload has {raw.size} floats, header implies {n * m * f}"
            )
        values = raw.reshape(n, m, f)
    elif format == "csv-matrix":
        # CSV payload is the unfolded f x nm matrix.
        mat = load_matrix_csv(base.with_suffix(".csv"))
        if mat.shape != (f, n * m):
            raise SizeError(
                f"csv payload is {mat.shape}, header implies ({f}, {n * m})"
            )
        values = refold(mat, n, m).values
    else:
        raise FormatError(f"unknown cube format '{format}'")

    wavelengths = header.get("band_wavelengths")
    return HsCube(values, band_wavelengths=wavelengths)


def save_cube(cube: HsCube, path) -> list[Path]:
    """Write ``<path>.f32`` + ``<path>.json``; returns the paths written."""
    base = Path(path)
    if base.suffix in (".f32", ".json"):
        base = base.with_suffix("")
    header = {"n": cube.n, "m": cube.m, "f": cube.f, "order": CUBE_ORDER}
    if cube.band_wavelengths is not None:
        header["band_wavelengths"] = list(cube.band_wavelengths)
    header_path = base.with_suffix(".json")
    payload_path = base.with_suffix(".f32")
    header_path.write_text(json.dumps(header, indent=1))
    np.ascontiguousarray(cube.values, dtype="<f4").tofile(payload_path)
    return [payload_path, header_path]


def unfold(cube: HsCube) -> np.ndarray:
    """Unfold to the f x nm data matrix, column j = row*m + col."""
    n, m, f = cube.n, cube.m, cube.f
    return np.ascontiguousarray(cube.values.transpose(2, 0, 1).reshape(f, n * m))


def refold(Y: np.ndarray, n: int, m: int, band_wavelengths=None) -> HsCube:
    """Inverse of :func:`unfold`."""
    Y = np.asarray(Y)
    f = Y.shape[0]
    if Y.shape[1] != n * m:
        raise ShapeError(f"matrix has {Y.shape[1]} columns, expected n*m={n * m}")
    values = np.ascontiguousarray(Y.reshape(f, n, m).transpose(1, 2, 0))
    return HsCube(values, band_wavelengths=band_wavelengths)


def normalize_joint(Y: np.ndarray, R_raw: np.ndarray):
    """Divide both Y and the raw dictionary by max|Y|, preserving inter-voxel
    scaling. Returns ``(Y_scaled, R_scaled, scale)``."""
    Y = np.asarray(Y, dtype=float)
    scale = float(np.max(np.abs(Y)))
    if scale == 0.0:
        raise DegenerateInputError("cannot normalize an all-zero data matrix")
    return Y / scale, np.asarray(R_raw, dtype=float) / scale, scale


def load_matrix_csv(path) -> np.ndarray:
    mat = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    if not np.all(np.isfinite(mat)):
        raise FormatError(f"non-finite entries in {path}")
    return mat


def save_matrix_csv(M: np.ndarray, path) -> Path:
    path = Path(path)
    np.savetxt(path, np.atleast_2d(M), delimiter=",", fmt="%.17g")
    return path


def load_mask(path, positive_class_id: int = 16) -> GroundTruthMask:
    """Read raw integer class labels and binarize against the positive class."""
    labels = np.loadtxt(path, dtype=int).ravel()
    return GroundTruthMask(
        (labels == positive_class_id).astype(int), positive_class_id=positive_class_id
    )


def save_mask(labels: np.ndarray, path) -> Path:
    path = Path(path)
    np.savetxt(path, np.asarray(labels, dtype=int).ravel(), fmt="%d")
    return path
