"""Raw volume loading, VOI handling and the high-density artifact filter.

Raw voxel files are headerless: voxel ``(x, y, z)`` sits at element offset
``z * dim_y * dim_x + y * dim_x + x`` (x fastest, z slowest), little-endian
unless the manifest says otherwise.  In memory, volumes are indexed
``voxels[x, y, z]``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import (
    DegenerateVoi,
    IoError,
    ManifestMismatch,
    UnsupportedFormat,
    VoiOutOfBounds,
)

Triple = Tuple[int, int, int]

HD_THRESHOLD = 60_000
HD_MAX_FRACTION = 0.001

_DTYPES = {8: "u1", 16: "u2"}
_ENDIAN = {"little": "<", "big": ">"}


@dataclass(frozen=True)
class Volume:
    voxels: np.ndarray
    bit_depth: int
    voxel_size_um: float = 1.0

    def __post_init__(self):
        if self.bit_depth not in _DTYPES:
            raise UnsupportedFormat(f"bit depth {self.bit_depth} not in (8, 16)")
        if self.voxels.ndim != 3 or min(self.voxels.shape) < 1:
            raise ValueError(f"voxels must be a non-empty 3D array, got shape {self.voxels.shape}")
        if self.voxel_size_um <= 0:
            raise ValueError("voxel_size_um must be positive")
        if self.voxels.dtype.kind != "u":
            raise ValueError(f"voxels must be unsigned integers, got {self.voxels.dtype}")
        if self.voxels.dtype.itemsize * 8 > self.bit_depth and self.voxels.max() > self.max_value:
            raise ValueError(f"voxel values exceed {self.bit_depth}-bit range")
        view = self.voxels.view()
        view.flags.writeable = False
        object.__setattr__(self, "voxels", view)

    @property
    def dims(self) -> Triple:
        return tuple(int(n) for n in self.voxels.shape)

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1


@dataclass(frozen=True)
class Voi:
    origin: Triple
    extent: Triple

    def __post_init__(self):
        if self.extent[0] != self.extent[1]:
            raise DegenerateVoi(f"VOI cross-section must be square, got extent {self.extent}")
        if min(self.extent) < 1:
            raise DegenerateVoi(f"VOI extent must be positive, got {self.extent}")
        if min(self.origin) < 0:
            raise VoiOutOfBounds(f"negative VOI origin {self.origin}")

    @classmethod
    def full(cls, dims: Triple) -> "Voi":
        return cls((0, 0, 0), tuple(dims))

    def fits(self, dims: Triple) -> bool:
        return all(o + e <= n for o, e, n in zip(self.origin, self.extent, dims))


@dataclass(frozen=True)
class Circle:
    center_x: float
    center_y: float
    radius: float


@dataclass
class Manifest:
    sample_id: str
    path: str
    bit_depth: int
    dims: Triple
    voxel_size_um: float = 1.0
    endianness: str = "little"
    voi: Optional[Voi] = None
    circle: Optional[Circle] = None
    # directory the manifest was read from; relative ``path`` resolves against it
    base_dir: str = field(default=".", compare=False, repr=False)

    @property
    def file_path(self) -> str:
        return os.path.join(self.base_dir, self.path)

    @property
    def expected_bytes(self) -> int:
        return int(np.prod(self.dims)) * (self.bit_depth // 8)

    def resolve_voi(self) -> Voi:
        """VOI from the manifest, else inscribed in ``circle``, else the full volume."""
        if self.voi is not None:
            return self.voi
        if self.circle is not None:
            return inscribed_square_voi(
                (self.circle.center_x, self.circle.center_y),
                self.circle.radius,
                (0, self.dims[2]),
                dims=self.dims,
            )
        return Voi.full(self.dims)

    def to_dict(self) -> dict:
        out = {
            "sample_id": self.sample_id,
            "path": self.path,
            "bit_depth": self.bit_depth,
            "dims": list(self.dims),
            "voxel_size_um": self.voxel_size_um,
            "endianness": self.endianness,
            "voi": None if self.voi is None else {
                "origin": list(self.voi.origin), "extent": list(self.voi.extent)},
        }
        if self.circle is not None:
            out["circle"] = {"center_x": self.circle.center_x,
                             "center_y": self.circle.center_y,
                             "radius": self.circle.radius}
        return out

    @classmethod
    def from_dict(cls, data: dict, base_dir: str = ".") -> "Manifest":
        try:
            voi = data.get("voi")
            circle = data.get("circle")
            return cls(
                sample_id=str(data["sample_id"]),
                path=str(data["path"]),
                bit_depth=int(data["bit_depth"]),
                dims=tuple(int(v) for v in data["dims"]),
                voxel_size_um=float(data.get("voxel_size_um", 1.0)),
                endianness=str(data.get("endianness", "little")),
                voi=None if voi is None else Voi(tuple(int(v) for v in voi["origin"]),
                                                  tuple(int(v) for v in voi["extent"])),
                circle=None if circle is None else Circle(float(circle["center_x"]),
                                                          float(circle["center_y"]),
                                                          float(circle["radius"])),
                base_dir=base_dir,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestMismatch(f"malformed manifest: {exc}") from exc


def read_manifest(path: str) -> Manifest:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestMismatch(f"manifest {path} is not valid JSON: {exc}") from exc
    return Manifest.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def write_manifest(manifest: Manifest, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dtype(bit_depth: int, endianness: str) -> np.dtype:
    if bit_depth not in _DTYPES:
        raise UnsupportedFormat(f"bit depth {bit_depth} not in (8, 16)")
    if endianness not in _ENDIAN:
        raise UnsupportedFormat(f"unknown endianness {endianness!r}")
    return np.dtype(_ENDIAN[endianness] + _DTYPES[bit_depth])


def load_volume(manifest: Manifest) -> Volume:
    dtype = _dtype(manifest.bit_depth, manifest.endianness)
    if len(manifest.dims) != 3 or min(manifest.dims) < 1:
        raise ManifestMismatch(f"invalid dims {manifest.dims}")
    path = manifest.file_path
    try:
        size = os.path.getsize(path)
    except OSError as exc:
        raise IoError(f"cannot stat {path}: {exc}") from exc
    if size != manifest.expected_bytes:
        raise ManifestMismatch(
            f"{path}: {size} bytes on disk, manifest implies {manifest.expected_bytes}")
    try:
        raw = np.fromfile(path, dtype=dtype)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    dx, dy, dz = manifest.dims
    # file order is (z, y, x) C-contiguous; expose it as (x, y, z)
    voxels = raw.astype(dtype.newbyteorder("="), copy=False).reshape(dz, dy, dx).transpose(2, 1, 0)
    return Volume(voxels, manifest.bit_depth, manifest.voxel_size_um)


def write_volume(volume: Volume, path: str, endianness: str = "little") -> None:
    dtype = _dtype(volume.bit_depth, endianness)
    np.ascontiguousarray(volume.voxels.transpose(2, 1, 0)).astype(dtype).tofile(path)


def inscribed_square_voi(center, radius, z_range, dims: Optional[Triple] = None) -> Voi:
    """Largest axis-aligned square inside a circle, extruded over ``[z0, z1)``.

    The side is ``floor(radius * sqrt(2))``; the square starts at
    ``center - side // 2`` and, when ``dims`` is given, is shifted (and if
    needed shrunk) to lie inside the volume.
    """
    z0, z1 = int(z_range[0]), int(z_range[1])
    if radius <= 0 or z1 <= z0:
        raise DegenerateVoi(f"radius {radius} / z range {z_range} do not define a VOI")
    side = int(math.floor(radius * math.sqrt(2.0)))
    if side < 1:
        raise DegenerateVoi(f"radius {radius} too small for a 1-voxel square")
    cx, cy = center
    x0 = int(math.floor(cx)) - side // 2
    y0 = int(math.floor(cy)) - side // 2
    if dims is not None:
        side = min(side, dims[0], dims[1])
        x0 = min(max(x0, 0), dims[0] - side)
        y0 = min(max(y0, 0), dims[1] - side)
        z0 = max(z0, 0)
        z1 = min(z1, dims[2])
        if z1 <= z0:
            raise DegenerateVoi(f"z range {z_range} lies outside the volume")
    return Voi((x0, y0, z0), (side, side, z1 - z0))


def crop_voi(volume: Volume, voi: Voi) -> Volume:
    if not voi.fits(volume.dims):
        raise VoiOutOfBounds(f"{voi} exceeds volume dims {volume.dims}")
    (x0, y0, z0), (ex, ey, ez) = voi.origin, voi.extent
    sub = volume.voxels[x0:x0 + ex, y0:y0 + ey, z0:z0 + ez]
    return Volume(sub, volume.bit_depth, volume.voxel_size_um)


def high_density_fraction(volume: Volume, threshold: int = HD_THRESHOLD) -> float:
    if threshold >= (1 << volume.bit_depth):
        raise ValueError(f"threshold {threshold} outside {volume.bit_depth}-bit range")
    return int(np.count_nonzero(volume.voxels > threshold)) / volume.voxels.size


def is_high_density(volume: Volume, threshold: int = HD_THRESHOLD,
                    max_fraction: float = HD_MAX_FRACTION) -> bool:
    """True when strictly more than ``max_fraction`` of voxels exceed ``threshold``.

    8-bit volumes cannot exceed the 16-bit default threshold and are never flagged.
    """
    if threshold >= (1 << volume.bit_depth):
        return False
    return high_density_fraction(volume, threshold) > max_fraction
