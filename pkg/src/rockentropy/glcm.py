"""Grey-level co-occurrence baseline: energy, dissimilarity, homogeneity.

Angles are in degrees.  0 pairs a pixel with its right neighbour (next
column), 90 with the pixel below it (next row).  Volume features average
per-slice, per-angle values over equally spaced slices of the three
orthogonal views (xy, xz, yz).
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from . import _kernels as K
from .errors import DegenerateSlice
from .volume_io import Volume

DEFAULT_LEVELS = 256
SLICES_PER_VIEW = 100

_OFFSETS = {0: (0, 1), 90: (1, 0)}


@dataclass(frozen=True)
class GlcmMatrix:
    probs: np.ndarray
    levels: int
    distance: int
    angle: int


@dataclass(frozen=True)
class GlcmFeatures:
    energy: float
    dissimilarity: float
    homogeneity: float


def quantize(slice_, levels: int = DEFAULT_LEVELS, bit_depth: int = 8) -> np.ndarray:
    """Uniform binning of ``[0, 2**bit_depth)`` into ``levels`` bins."""
    if levels < 2:
        raise ValueError(f"need at least 2 grey levels, got {levels}")
    a = np.asarray(slice_, dtype=np.int64)
    q = (a * levels) // (1 << bit_depth)
    return np.clip(q, 0, levels - 1).astype(np.intp)


def glcm(q, distance: int = 1, angle: int = 0, symmetric: bool = True,
         levels: int | None = None) -> GlcmMatrix:
    q = np.ascontiguousarray(q, dtype=np.intp)
    if q.ndim != 2:
        raise ValueError("glcm needs a 2D slice")
    if angle not in _OFFSETS:
        raise ValueError(f"angle must be 0 or 90, got {angle}")
    if levels is None:
        levels = int(q.max()) + 1
    if q.min() < 0 or q.max() >= levels:
        raise ValueError(f"slice values outside [0, {levels})")
    dr, dc = (distance * o for o in _OFFSETS[angle])
    if q.shape[0] <= dr or q.shape[1] <= dc:
        raise DegenerateSlice(f"slice {q.shape} too small for offset ({dr}, {dc})")
    counts = K.cooccurrence(q, dr, dc, levels)
    if symmetric:
        counts = counts + counts.T
    return GlcmMatrix(counts / counts.sum(), levels, distance, angle)


def glcm_features(m: GlcmMatrix) -> GlcmFeatures:
    p = m.probs
    i, j = np.indices(p.shape)
    diff = np.abs(i - j)
    return GlcmFeatures(
        energy=float(np.sum(p * p)),
        dissimilarity=float(np.sum(diff * p)),
        homogeneity=float(np.sum(p / (1.0 + diff))),
    )


def slice_indices(length: int, count: int = SLICES_PER_VIEW) -> np.ndarray:
    """``min(count, length)`` evenly spaced indices from 0 to ``length - 1``."""
    m = min(count, length)
    if m == 1:
        return np.zeros(1, dtype=int)
    # floor(x + 0.5): halves round up, independent of numpy's banker's rounding
    return np.array([int(math.floor(i * (length - 1) / (m - 1) + 0.5)) for i in range(m)])


def _views(voxels: np.ndarray, count: int):
    for axis in range(3):
        for idx in slice_indices(voxels.shape[axis], count):
            yield np.take(voxels, idx, axis=axis)


def volume_glcm_features(volume: Volume, levels: int = DEFAULT_LEVELS,
                         slices_per_view: int = SLICES_PER_VIEW,
                         angles: Sequence[int] = (0, 90), symmetric: bool = True) -> GlcmFeatures:
    feats = []
    for sl in _views(volume.voxels, slices_per_view):
        q = quantize(sl, levels, volume.bit_depth)
        for angle in angles:
            try:
                feats.append(glcm_features(glcm(q, 1, angle, symmetric, levels)))
            except DegenerateSlice:
                # a 1-voxel-thick view has no pairs along that axis
                continue
    if not feats:
        raise DegenerateSlice(f"volume {volume.dims} has no slice large enough for a GLCM")
    arr = np.array([(f.energy, f.dissimilarity, f.homogeneity) for f in feats])
    e, d, h = arr.mean(axis=0)
    return GlcmFeatures(float(e), float(d), float(h))


GLCM_FIELDS = ("sample_id", "energy", "dissimilarity", "homogeneity")


def write_glcm_csv(dest, rows: Iterable[Tuple[str, GlcmFeatures]]) -> None:
    """Write feature rows to a path or an open text stream."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="") as fh:
            write_glcm_csv(fh, rows)
        return
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(GLCM_FIELDS)
    for sid, f in rows:
        w.writerow([sid, repr(f.energy), repr(f.dissimilarity), repr(f.homogeneity)])
