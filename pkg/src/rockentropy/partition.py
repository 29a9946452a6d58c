"""Partition of a VOI-cropped volume into equal cubic subcubes.

The x and y axes are cut into ``d`` segments of side ``s = dim_x // d``; the
same side then fixes ``n_z = dim_z // s`` blocks along z.  Tiling is anchored
at the origin so leftover voxels sit at the high end of each axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import TooManyDivisions
from .volume_io import Volume


@dataclass(frozen=True)
class SubcubeGrid:
    segment: int
    d: int
    n_z: int
    leftover: Tuple[int, int, int]

    @property
    def counts(self) -> Tuple[int, int, int]:
        return (self.d, self.d, self.n_z)

    @property
    def n_subcubes(self) -> int:
        return self.d * self.d * self.n_z

    @property
    def covered(self) -> Tuple[int, int, int]:
        """Extent of the tiled box, starting at the origin."""
        s = self.segment
        return (self.d * s, self.d * s, self.n_z * s)

    def flat_index(self, i: int, j: int, k: int) -> int:
        return (i * self.d + j) * self.n_z + k

    def unflat_index(self, b: int) -> Tuple[int, int, int]:
        return (b // (self.d * self.n_z), (b // self.n_z) % self.d, b % self.n_z)


def plan_subcubes(dims, d: int) -> SubcubeGrid:
    dim_x, dim_y, dim_z = (int(v) for v in dims)
    if dim_x != dim_y:
        raise ValueError(f"VOI cross-section must be square, got {dim_x}x{dim_y}")
    if d < 2:
        raise ValueError(f"divisions must be >= 2, got {d}")
    s = dim_x // d
    if s < 1:
        raise TooManyDivisions(f"{d} divisions of a {dim_x}-voxel axis leave empty segments")
    n_z = dim_z // s
    if n_z < 1:
        raise TooManyDivisions(f"segment {s} longer than z extent {dim_z}")
    return SubcubeGrid(
        segment=s,
        d=d,
        n_z=n_z,
        leftover=(dim_x - d * s, dim_y - d * s, dim_z - n_z * s),
    )


def subcube_voxels(volume: Volume, grid: SubcubeGrid, index) -> np.ndarray:
    """Flat array of the ``s**3`` values of subcube ``(i, j, k)`` (z fastest)."""
    i, j, k = index
    if not (0 <= i < grid.d and 0 <= j < grid.d and 0 <= k < grid.n_z):
        raise IndexError(f"subcube {index} outside grid {grid.counts}")
    s = grid.segment
    return volume.voxels[i * s:(i + 1) * s, j * s:(j + 1) * s, k * s:(k + 1) * s].ravel()
