"""End-to-end ranking of a dataset and the quantile-probability coefficient.

The heterogeneity coefficient of an image is its empirical CDF position among
all entropies of the dataset for one (attribute, divisions) pair:
``rank / N`` with average ranks for ties.  Because standardization pools
every sample, the coefficient is only meaningful relative to the batch it was
computed in; adding a sample means re-running the batch.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.stats import rankdata

from .attributes import (
    AttributeKind,
    AttributeTable,
    StandardizationStats,
    compute_attribute_table,
    standardize,
)
from .entropy import EntropyRecord, KdeConfig, image_entropy
from .errors import ConstantDataset, HeterogeneousBatch, NoSurvivors, RockEntropyError
from .partition import plan_subcubes
from .volume_io import (
    HD_MAX_FRACTION,
    HD_THRESHOLD,
    Manifest,
    Volume,
    crop_voi,
    high_density_fraction,
    load_volume,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HeterogeneityCoefficient:
    sample_id: str
    attribute: AttributeKind
    d: int
    entropy_bits: float
    rank: float
    quantile_prob: float


@dataclass(frozen=True)
class SkipRecord:
    sample_id: str
    reason: str
    attribute: Optional[AttributeKind] = None
    d: Optional[int] = None
    # True for the high-density filter, False for failures
    excluded: bool = False


@dataclass(frozen=True)
class HighDensityFilter:
    enabled: bool = True
    threshold: int = HD_THRESHOLD
    max_fraction: float = HD_MAX_FRACTION


@dataclass
class RankResult:
    attribute: AttributeKind
    d: int
    coefficients: List[HeterogeneityCoefficient]
    entropies: List[EntropyRecord]
    skipped: List[SkipRecord]
    standardization: Optional[StandardizationStats] = None
    tables: List[AttributeTable] = field(default_factory=list, repr=False)


def quantile_probabilities(records: Sequence[EntropyRecord]) -> List[HeterogeneityCoefficient]:
    if not records:
        raise ValueError("no entropy records to rank")
    keys = {(r.attribute, r.d) for r in records}
    if len(keys) != 1:
        raise HeterogeneousBatch(f"records mix {len(keys)} (attribute, d) pairs")
    h = np.array([r.entropy_bits for r in records], dtype=np.float64)
    ranks = rankdata(h, method="average")
    n = len(records)
    return [HeterogeneityCoefficient(r.sample_id, r.attribute, r.d, r.entropy_bits,
                                     float(rk), float(rk) / n)
            for r, rk in zip(records, ranks)]


@dataclass
class _Prepared:
    sample_id: str
    tables: Dict[AttributeKind, AttributeTable] = field(default_factory=dict)
    skipped: List[SkipRecord] = field(default_factory=list)


def _prepare(manifest: Manifest, d: int, kinds: Sequence[AttributeKind],
             hd: HighDensityFilter) -> _Prepared:
    try:
        vol = crop_voi(load_volume(manifest), manifest.resolve_voi())
    except (RockEntropyError, ValueError) as exc:
        return _Prepared(manifest.sample_id, skipped=[
            SkipRecord(manifest.sample_id, f"{type(exc).__name__}: {exc}", d=d)])
    return _prepare_volume(manifest.sample_id, vol, d, kinds, hd)


def _prepare_volume(sid: str, vol: Volume, d: int, kinds: Sequence[AttributeKind],
                    hd: HighDensityFilter) -> _Prepared:
    out = _Prepared(sid)
    if hd.enabled and hd.threshold < (1 << vol.bit_depth):
        frac = high_density_fraction(vol, hd.threshold)
        if frac > hd.max_fraction:
            out.skipped.append(SkipRecord(
                sid, f"high_density: fraction {frac!r} > {hd.max_fraction!r} above {hd.threshold}",
                excluded=True))
            return out
    try:
        grid = plan_subcubes(vol.dims, d)
    except (RockEntropyError, ValueError) as exc:
        out.skipped.append(SkipRecord(sid, f"{type(exc).__name__}: {exc}", d=d))
        return out
    for kind in kinds:
        try:
            out.tables[kind] = compute_attribute_table(vol, grid, kind, sid)
        except RockEntropyError as exc:
            out.skipped.append(SkipRecord(sid, f"{type(exc).__name__}: {exc}", kind, d))
    return out


def _rank_one_kind(kind: AttributeKind, d: int, prepared: Sequence[_Prepared],
                   cfg: KdeConfig) -> RankResult:
    skipped = []
    for p in prepared:
        skipped.extend(s for s in p.skipped if s.attribute in (None, kind))
    tables = [p.tables[kind] for p in prepared if kind in p.tables]
    stats = None
    if tables and not kind.discrete:
        try:
            tables, stats = standardize(tables)
        except ConstantDataset as exc:
            skipped.extend(SkipRecord(t.sample_id, f"ConstantDataset: {exc}", kind, d) for t in tables)
            tables = []
    entropies = []
    for t in tables:
        try:
            entropies.append(image_entropy(t, cfg))
        except RockEntropyError as exc:
            skipped.append(SkipRecord(t.sample_id, f"{type(exc).__name__}: {exc}", kind, d))
    coefficients = quantile_probabilities(entropies) if entropies else []
    skipped.sort(key=lambda s: s.sample_id)
    return RankResult(kind, d, coefficients, entropies, skipped, stats, tables)


def _check_args(d, kinds, ids):
    if d < 2:
        raise ValueError(f"divisions must be >= 2, got {d}")
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate sample_id in dataset")
    return [AttributeKind.parse(k) for k in kinds]


def _finish(prepared, d, kinds, cfg):
    results = [_rank_one_kind(kind, d, prepared, cfg) for kind in kinds]
    if not any(r.coefficients for r in results):
        raise NoSurvivors(f"no sample of {len(prepared)} survived for d={d}")
    for r in results:
        log.info("%s d=%d: %d ranked, %d skipped", r.attribute.value, d,
                 len(r.coefficients), len(r.skipped))
    return results


def _map(fn, items, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def rank_many(manifests: Sequence[Manifest], d: int, kinds: Iterable[Union[str, AttributeKind]],
              cfg: KdeConfig = KdeConfig(), hd_filter: HighDensityFilter = HighDensityFilter(),
              jobs: int = 1) -> List[RankResult]:
    """Rank a dataset under several attributes, loading each volume once.

    Results are ordered as ``kinds``; records inside each result are ordered
    by ``sample_id`` whatever the input or completion order.
    """
    kinds = _check_args(d, list(kinds), [m.sample_id for m in manifests])
    ordered = sorted(manifests, key=lambda m: m.sample_id)
    prepared = _map(lambda m: _prepare(m, d, kinds, hd_filter), ordered, jobs)
    return _finish(prepared, d, kinds, cfg)


def rank_volumes(volumes: Mapping[str, Volume], d: int, kinds: Iterable[Union[str, AttributeKind]],
                 cfg: KdeConfig = KdeConfig(), hd_filter: HighDensityFilter = HighDensityFilter(),
                 jobs: int = 1) -> List[RankResult]:
    """Same as ``rank_many`` for volumes already in memory (VOI already applied)."""
    kinds = _check_args(d, list(kinds), list(volumes))
    prepared = _map(lambda sid: _prepare_volume(sid, volumes[sid], d, kinds, hd_filter),
                    sorted(volumes), jobs)
    return _finish(prepared, d, kinds, cfg)


def rank_dataset(manifests: Sequence[Manifest], d: int, kind, cfg: KdeConfig = KdeConfig(),
                 hd_filter: HighDensityFilter = HighDensityFilter(), jobs: int = 1) -> RankResult:
    """Load, crop, filter, partition, standardize, measure entropy and rank."""
    return rank_many(manifests, d, [kind], cfg, hd_filter, jobs)[0]


COEFFICIENT_FIELDS = ("sample_id", "attribute", "d", "entropy_bits", "rank", "quantile_prob",
                      "excluded_flag", "skip_reason")


def write_coefficients_csv(path: str, results: Iterable[RankResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COEFFICIENT_FIELDS)
        for res in results:
            rows = [(c.sample_id, 0, [c.sample_id, res.attribute.value, res.d, repr(c.entropy_bits),
                                     repr(c.rank), repr(c.quantile_prob), 0, ""])
                    for c in res.coefficients]
            rows += [(s.sample_id, 1, [s.sample_id, res.attribute.value, res.d, "", "", "",
                                       int(s.excluded), s.reason])
                     for s in res.skipped]
            for _, _, row in sorted(rows, key=lambda r: (r[0], r[1], r[2][-1])):
                w.writerow(row)


SKIP_FIELDS = ("sample_id", "attribute", "d", "excluded_flag", "reason")


def write_skip_log(path: str, results: Iterable[RankResult]) -> None:
    seen = set()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SKIP_FIELDS)
        for res in results:
            for s in res.skipped:
                # sample-level skips repeat in every attribute's result
                key = (s.sample_id, s.attribute, s.d, s.reason)
                if key in seen:
                    continue
                seen.add(key)
                w.writerow([s.sample_id, "" if s.attribute is None else s.attribute.value,
                            "" if s.d is None else s.d, int(s.excluded), s.reason])
