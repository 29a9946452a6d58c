"""Seeded synthetic volumes with known heterogeneity ordering.

All randomness comes from numpy's PCG64 bit generator seeded with
``spec.seed``.  Draw order is fixed: blob centres first (``blobs`` only),
then one Gaussian noise field generated in raw-file order (z slowest,
x fastest).  Values are rounded half-to-even and clipped to the bit depth.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .errors import InvalidSpec
from .volume_io import Manifest, Voi, Volume, write_manifest, write_volume

KINDS = ("uniform_noise", "layered", "blobs")

_DEFAULTS = {
    "uniform_noise": {"mean": 128.0, "std": 10.0},
    "layered": {"levels": [80.0, 176.0], "std": 10.0},
    "blobs": {"background": 120.0, "std": 10.0, "n_blobs": 20, "radius": 6, "intensity": 200.0},
}


@dataclass(frozen=True)
class PhantomSpec:
    kind: str
    dims: Tuple[int, int, int] = (64, 64, 64)
    bit_depth: int = 8
    seed: int = 0
    params: Dict = field(default_factory=dict)

    def param(self, name):
        return self.params.get(name, _DEFAULTS[self.kind][name])


def _rng(spec: PhantomSpec) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(spec.seed))


def _noise(rng, dims, std) -> np.ndarray:
    dx, dy, dz = dims
    if std == 0:
        return np.zeros(dims)
    return rng.normal(0.0, std, size=(dz, dy, dx)).transpose(2, 1, 0)


def _finish(values: np.ndarray, spec: PhantomSpec) -> Volume:
    top = (1 << spec.bit_depth) - 1
    dtype = np.uint8 if spec.bit_depth == 8 else np.uint16
    vox = np.clip(np.rint(values), 0, top).astype(dtype)
    return Volume(vox, spec.bit_depth)


def _check(spec: PhantomSpec, kind: str):
    if spec.kind != kind:
        raise InvalidSpec(f"expected a {kind} spec, got {spec.kind}")
    if spec.bit_depth not in (8, 16):
        raise InvalidSpec(f"bit depth {spec.bit_depth} not in (8, 16)")
    if len(spec.dims) != 3 or min(spec.dims) < 1:
        raise InvalidSpec(f"invalid dims {spec.dims}")


def gen_uniform_noise(spec: PhantomSpec) -> Volume:
    _check(spec, "uniform_noise")
    rng = _rng(spec)
    return _finish(spec.param("mean") + _noise(rng, spec.dims, spec.param("std")), spec)


def gen_layered(spec: PhantomSpec) -> Volume:
    """Equal-thickness slabs stacked along z, one grey level per slab."""
    _check(spec, "layered")
    levels = [float(v) for v in spec.param("levels")]
    top = (1 << spec.bit_depth) - 1
    if len(levels) < 2:
        raise InvalidSpec("a layered phantom needs at least two layers")
    if len(set(levels)) < 2:
        raise InvalidSpec("layer levels must not all be equal")
    if any(v < 0 or v > top for v in levels):
        raise InvalidSpec(f"layer levels {levels} outside [0, {top}]")
    dz = spec.dims[2]
    if len(levels) > dz:
        raise InvalidSpec(f"{len(levels)} layers do not fit in {dz} slices")
    layer = np.arange(dz) * len(levels) // dz
    base = np.asarray(levels)[layer][None, None, :]
    rng = _rng(spec)
    return _finish(base + _noise(rng, spec.dims, spec.param("std")), spec)


def gen_blobs(spec: PhantomSpec) -> Volume:
    """Uniform background with random spherical inclusions."""
    _check(spec, "blobs")
    n_blobs = int(spec.param("n_blobs"))
    radius = int(spec.param("radius"))
    bg = float(spec.param("background"))
    intensity = float(spec.param("intensity"))
    if n_blobs < 0:
        raise InvalidSpec("n_blobs must be non-negative")
    if n_blobs and not (0 < radius < min(spec.dims) / 2):
        raise InvalidSpec(f"blob radius {radius} must be in (0, {min(spec.dims) / 2})")
    rng = _rng(spec)
    values = np.full(spec.dims, bg)
    if n_blobs:
        centres = np.stack([rng.integers(radius, n - radius, size=n_blobs) for n in spec.dims], axis=1)
        x, y, z = np.ogrid[: spec.dims[0], : spec.dims[1], : spec.dims[2]]
        for cx, cy, cz in centres:
            inside = (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2 <= radius * radius
            values[inside] = intensity
    return _finish(values + _noise(rng, spec.dims, spec.param("std")), spec)


_GENERATORS = {"uniform_noise": gen_uniform_noise, "layered": gen_layered, "blobs": gen_blobs}


def generate(spec: PhantomSpec) -> Volume:
    try:
        return _GENERATORS[spec.kind](spec)
    except KeyError:
        raise InvalidSpec(f"unknown phantom kind {spec.kind!r}; expected one of {KINDS}") from None


def write_phantom(spec: PhantomSpec, out_dir: str, sample_id: str) -> str:
    """Write ``<sample_id>.raw`` and ``<sample_id>.json``; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    vol = generate(spec)
    raw_name = f"{sample_id}.raw"
    write_volume(vol, os.path.join(out_dir, raw_name))
    manifest = Manifest(sample_id=sample_id, path=raw_name, bit_depth=vol.bit_depth,
                        dims=vol.dims, voxel_size_um=vol.voxel_size_um, endianness="little",
                        voi=Voi.full(vol.dims) if vol.dims[0] == vol.dims[1] else None)
    path = os.path.join(out_dir, f"{sample_id}.json")
    write_manifest(manifest, path)
    return path


def ordering_suite(seed: int, dims=(64, 64, 64), bit_depth: int = 8) -> List[Tuple[str, PhantomSpec]]:
    """One noise, one layered and one blob phantom with close global means.

    Layered and blob phantoms are the heterogeneous members; both should
    rank above the noise phantom under mean, std_dev and coeff_var.
    """
    return [
        (f"noise_s{seed}", PhantomSpec("uniform_noise", dims, bit_depth, seed * 10)),
        (f"layered_s{seed}", PhantomSpec("layered", dims, bit_depth, seed * 10 + 1)),
        (f"blobs_s{seed}", PhantomSpec("blobs", dims, bit_depth, seed * 10 + 2)),
    ]


def graded_suite(seed: int, dims=(64, 64, 64), bit_depth: int = 8) -> List[Tuple[str, PhantomSpec]]:
    """Three contrast levels of each phantom family.

    Contrast moves the spread-type attributes (std_dev, coeff_var) but leaves the
    scale-free shape attributes (kurtosis, skewness) mostly unchanged.
    """
    out = []
    base = seed * 100
    for t, std in enumerate((6.0, 10.0, 14.0)):
        out.append((f"noise{t}_s{seed}",
                    PhantomSpec("uniform_noise", dims, bit_depth, base + t, {"std": std})))
    for t, half in enumerate((15.0, 30.0, 50.0)):
        out.append((f"layered{t}_s{seed}",
                    PhantomSpec("layered", dims, bit_depth, base + 10 + t,
                                {"levels": [128.0 - half, 128.0 + half]})))
    for t, intensity in enumerate((150.0, 180.0, 230.0)):
        out.append((f"blobs{t}_s{seed}",
                    PhantomSpec("blobs", dims, bit_depth, base + 20 + t,
                                {"n_blobs": 12, "intensity": intensity})))
    return out
