"""Per-subcube grayscale attributes and dataset-wide standardization.

Moments use population conventions (divisor N); kurtosis is Fisher excess
kurtosis; the median of an even count is the lower middle element, so the
three order statistics always return a grey level present in the block.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels as K
from .errors import ConstantDataset, DegenerateAttribute
from .partition import SubcubeGrid
from .volume_io import Volume


class AttributeKind(enum.Enum):
    MINIMUM = "minimum"
    MAXIMUM = "maximum"
    MEDIAN = "median"
    MEAN = "mean"
    STD_DEV = "std_dev"
    COEFF_VAR = "coeff_var"
    SKEWNESS = "skewness"
    KURTOSIS = "kurtosis"

    @property
    def discrete(self) -> bool:
        return self in _DISCRETE

    @property
    def attr_class(self) -> str:
        return "discrete" if self.discrete else "continuous"

    @classmethod
    def parse(cls, name) -> "AttributeKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown attribute {name!r}; expected one of {valid}") from None


_DISCRETE = frozenset({AttributeKind.MINIMUM, AttributeKind.MAXIMUM, AttributeKind.MEDIAN})


@dataclass(frozen=True)
class AttributeTable:
    sample_id: str
    attribute: AttributeKind
    d: int
    values: np.ndarray
    standardized: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.standardized is not None and len(self.standardized) != len(self.values):
            raise ValueError("standardized values must match raw values in length")


@dataclass(frozen=True)
class StandardizationStats:
    attribute: AttributeKind
    d: int
    mu: float
    sigma: float
    n: int


def _from_stats(stats: np.ndarray, kind: AttributeKind) -> np.ndarray:
    """Attribute values from a block-statistics table (see ``_kernels``)."""
    if kind is AttributeKind.MINIMUM:
        return stats[:, K.MIN].copy()
    if kind is AttributeKind.MAXIMUM:
        return stats[:, K.MAX].copy()
    if kind is AttributeKind.MEDIAN:
        return stats[:, K.MEDIAN].copy()
    mean = stats[:, K.MEAN]
    if kind is AttributeKind.MEAN:
        return mean.copy()
    m2 = stats[:, K.M2]
    std = np.sqrt(m2)
    if kind is AttributeKind.STD_DEV:
        return std
    if kind is AttributeKind.COEFF_VAR:
        bad = np.count_nonzero(mean == 0)
        if bad:
            raise DegenerateAttribute(f"coeff_var undefined: {bad} subcube(s) with zero mean")
        return std / mean
    bad = np.count_nonzero(m2 == 0)
    if bad:
        raise DegenerateAttribute(f"{kind.value} undefined: {bad} constant subcube(s)")
    if kind is AttributeKind.SKEWNESS:
        return stats[:, K.M3] / (m2 * std)
    return stats[:, K.M4] / (m2 * m2) - 3.0


def compute_attribute(voxels, kind) -> float:
    """Value of one attribute over a flat sequence of grey levels."""
    kind = AttributeKind.parse(kind)
    arr = np.asarray(voxels, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("cannot compute an attribute of an empty subcube")
    stats = K._moments_numpy(arr[None, :], want_median=kind is AttributeKind.MEDIAN)
    return float(_from_stats(stats, kind)[0])


def compute_attribute_table(volume: Volume, grid: SubcubeGrid, kind, sample_id: str = "") -> AttributeTable:
    """One attribute value per subcube, in ``grid.flat_index`` order.

    Raises DegenerateAttribute if any subcube makes the attribute undefined;
    callers skip the whole image for that attribute.
    """
    kind = AttributeKind.parse(kind)
    if any(c > n for c, n in zip(grid.covered, volume.dims)):
        raise ValueError(f"grid covering {grid.covered} does not fit volume {volume.dims}")
    stats = K.block_stats(volume.voxels, grid.segment, grid.d, grid.n_z,
                          kind is AttributeKind.MEDIAN)
    return AttributeTable(sample_id, kind, grid.d, _from_stats(stats, kind))


def pooled_stats(tables: Sequence[AttributeTable]) -> StandardizationStats:
    if not tables:
        raise ValueError("no tables to standardize")
    kinds = {(t.attribute, t.d) for t in tables}
    if len(kinds) != 1:
        raise ValueError(f"tables mix (attribute, d) pairs: {sorted((k.value, d) for k, d in kinds)}")
    kind, d = kinds.pop()
    n = sum(len(t.values) for t in tables)
    if n < 2:
        raise ConstantDataset("standardization needs at least two pooled values")
    # fsum is exactly rounded, hence independent of sample order
    mu = math.fsum(math.fsum(t.values) for t in tables) / n
    ss = math.fsum(math.fsum((t.values - mu) ** 2) for t in tables)
    sigma = math.sqrt(ss / n)
    return StandardizationStats(kind, d, mu, sigma, n)


def standardize(tables: Sequence[AttributeTable]) -> Tuple[List[AttributeTable], StandardizationStats]:
    """z-score every table with the mean and std pooled over all of them."""
    st = pooled_stats(tables)
    if st.sigma == 0:
        raise ConstantDataset(f"{st.attribute.value} at d={st.d} is constant across the dataset")
    out = [replace(t, standardized=(t.values - st.mu) / st.sigma) for t in tables]
    return out, st


CSV_FIELDS = ("sample_id", "attribute", "d", "subcube_index", "raw_value", "z_value")


def write_attribute_csv(path: str, tables: Iterable[AttributeTable]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for t in tables:
            z = t.standardized
            for b, raw in enumerate(t.values):
                w.writerow([t.sample_id, t.attribute.value, t.d, b, repr(float(raw)),
                            "" if z is None else repr(float(z[b]))])


def read_attribute_csv(path: str) -> List[AttributeTable]:
    rows = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            key = (r["sample_id"], r["attribute"], int(r["d"]))
            rows.setdefault(key, []).append(r)
    tables = []
    for (sid, attr, d), rs in rows.items():
        rs.sort(key=lambda r: int(r["subcube_index"]))
        values = np.array([float(r["raw_value"]) for r in rs])
        z = None
        if all(r["z_value"] != "" for r in rs):
            z = np.array([float(r["z_value"]) for r in rs])
        tables.append(AttributeTable(sid, AttributeKind.parse(attr), d, values, z))
    return tables
