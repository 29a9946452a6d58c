"""Rank and association statistics for validating heterogeneity rankings.

All p-values are two-sided.  Labels are 1 for the "heterogeneous" group and
0 for the other one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from .errors import EmptyGroup, UndefinedCorrelation

EXACT_MAX_N = 12


@dataclass(frozen=True)
class ContingencyTable2x2:
    n11: int
    n10: int
    n01: int
    n00: int

    def __post_init__(self):
        if min(self.n11, self.n10, self.n01, self.n00) < 0:
            raise ValueError("contingency counts must be non-negative")
        if self.total < 1:
            raise ValueError("contingency table is empty")

    @property
    def total(self) -> int:
        return self.n11 + self.n10 + self.n01 + self.n00

    @property
    def marginals(self) -> Tuple[int, int, int, int]:
        """Row sums ``n1., n0.`` then column sums ``n.1, n.0``."""
        return (self.n11 + self.n10, self.n01 + self.n00,
                self.n11 + self.n01, self.n10 + self.n00)

    @classmethod
    def from_labels(cls, a, b) -> "ContingencyTable2x2":
        a = np.asarray(a, dtype=int)
        b = np.asarray(b, dtype=int)
        if a.shape != b.shape:
            raise ValueError("label sequences differ in length")
        return cls(int(np.sum((a == 1) & (b == 1))), int(np.sum((a == 1) & (b == 0))),
                   int(np.sum((a == 0) & (b == 1))), int(np.sum((a == 0) & (b == 0))))


@dataclass(frozen=True)
class LabeledValues:
    values: np.ndarray
    labels: np.ndarray

    def __init__(self, values, labels):
        v = np.asarray(values, dtype=np.float64).ravel()
        lab = np.asarray(labels).ravel()
        if v.shape != lab.shape:
            raise ValueError("values and labels differ in length")
        if not np.all((lab == 0) | (lab == 1)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", lab.astype(np.int8))

    @property
    def n1(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n0(self) -> int:
        return int(np.count_nonzero(self.labels == 0))

    def check_groups(self):
        if self.n1 == 0 or self.n0 == 0:
            raise EmptyGroup(f"need both groups non-empty, got n1={self.n1}, n0={self.n0}")

    def swapped(self) -> "LabeledValues":
        return LabeledValues(self.values, 1 - self.labels)


@dataclass(frozen=True)
class MwuResult:
    u_statistic: float
    p_value: float
    mode: str


def _has_ties(a: np.ndarray) -> bool:
    return np.unique(a).size != a.size


def spearman(x, y) -> float:
    """Spearman rank correlation.

    Tie-free data use ``1 - 6 sum(d^2) / (n (n^2 - 1))``; with ties the
    Pearson correlation of average ranks is returned.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError("spearman needs sequences of equal length")
    n = x.size
    if n < 2:
        raise UndefinedCorrelation("spearman needs at least two pairs")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelation("spearman is undefined for a constant sequence")
    rx = rankdata(x)
    ry = rankdata(y)
    if not (_has_ties(x) or _has_ties(y)):
        d2 = float(np.sum((rx - ry) ** 2))
        return 1.0 - 6.0 * d2 / (n * (n * n - 1.0))
    rx -= rx.mean()
    ry -= ry.mean()
    rho = float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))
    return min(1.0, max(-1.0, rho))


def phi(t: ContingencyTable2x2) -> float:
    r1, r0, c1, c0 = t.marginals
    if min(r1, r0, c1, c0) == 0:
        raise UndefinedCorrelation(f"phi undefined with a zero marginal {t.marginals}")
    return (t.n11 * t.n00 - t.n10 * t.n01) / math.sqrt(float(r1) * r0 * c1 * c0)


def rank_biserial(data: LabeledValues) -> Tuple[float, float]:
    """Mean-rank difference ``R1/n1 - R0/n0`` and its normalization to [-1, 1].

    The normalized value is ``2 * (R1/n1 - R0/n0) / (n1 + n0)``, which equals
    ``1 - 2 U0 / (n1 n0)``.
    """
    data.check_groups()
    ranks = rankdata(data.values)
    n1, n0 = data.n1, data.n0
    r1 = float(ranks[data.labels == 1].sum())
    r0 = float(ranks[data.labels == 0].sum())
    raw = r1 / n1 - r0 / n0
    return raw, 2.0 * raw / (n1 + n0)


def u_statistics(data: LabeledValues) -> Tuple[float, float]:
    """``(U1, U0)``: pairs where group 1 (resp. 0) is larger, ties counting 1/2."""
    data.check_groups()
    ranks = rankdata(data.values)
    n1, n0 = data.n1, data.n0
    u1 = float(ranks[data.labels == 1].sum()) - n1 * (n1 + 1) / 2.0
    return u1, n1 * n0 - u1


def mwu_null_counts(n1: int, n0: int) -> np.ndarray:
    """Number of rank arrangements giving each U in ``0..n1*n0`` (no ties)."""
    # c[i][j] is the count array for group sizes (i, j); build over j, then i
    prev = [np.ones(1, dtype=np.float64) for _ in range(n0 + 1)]  # i = 0
    for i in range(1, n1 + 1):
        cur = [np.ones(1, dtype=np.float64)]  # j = 0
        for j in range(1, n0 + 1):
            # smallest element belongs to group 1 (adds 0) or to group 0 (adds i)
            a = prev[j]
            b = cur[j - 1]
            out = np.zeros(i * j + 1)
            out[: a.size] += a
            out[i: i + b.size] += b
            cur.append(out)
        prev = cur
    return prev[n0]


def mann_whitney_u(data: LabeledValues, mode: str = "auto") -> MwuResult:
    """Two-sided Mann-Whitney U test; the reported statistic is U1.

    ``mode="auto"`` uses the exact null distribution when ``n1 + n0 <= 12``
    and there are no ties, else the normal approximation with tie-corrected
    variance and continuity correction.
    """
    if mode not in ("auto", "exact", "normal_approx"):
        raise ValueError(f"unknown mode {mode!r}")
    u1, _ = u_statistics(data)
    n1, n0 = data.n1, data.n0
    ties = _has_ties(data.values)
    if mode == "auto":
        mode = "exact" if (n1 + n0 <= EXACT_MAX_N and not ties) else "normal_approx"
    if mode == "exact":
        if ties:
            raise ValueError("exact Mann-Whitney distribution requires tie-free data")
        counts = mwu_null_counts(n1, n0)
        total = counts.sum()
        k = int(round(u1))
        lower = counts[: k + 1].sum() / total
        upper = counts[k:].sum() / total
        return MwuResult(u1, float(min(1.0, 2.0 * min(lower, upper))), "exact")

    n = n1 + n0
    _, tie_counts = np.unique(data.values, return_counts=True)
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (n * (n - 1.0)) if n > 1 else 0.0
    var = n1 * n0 / 12.0 * ((n + 1.0) - tie_term)
    if var <= 0:
        return MwuResult(u1, 1.0, "normal_approx")
    z = (abs(u1 - n1 * n0 / 2.0) - 0.5) / math.sqrt(var)
    p = 2.0 * float(ndtr(-max(z, 0.0)))
    return MwuResult(u1, min(1.0, p), "normal_approx")


def ccdf_points(values) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct values and the fraction of observations at or above each one."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise ValueError("ccdf of an empty sequence")
    uniq, first = np.unique(v, return_index=True)
    return uniq, (v.size - first) / v.size


def box_summary(values) -> dict:
    """Five-number summary with linearly interpolated quartiles."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("box summary of an empty sequence")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {"n": int(v.size), "min": float(v.min()), "q1": float(q1), "median": float(med),
            "q3": float(q3), "max": float(v.max())}


def report(data: LabeledValues, reference_labels: Sequence[int] | None = None,
           threshold: float | None = None) -> dict:
    """All four statistics for one labelled set of values.

    ``phi`` compares ``labels`` against ``reference_labels`` when given,
    otherwise against ``values > threshold`` (default: the median value).
    """
    raw, normalized = rank_biserial(data)
    mwu = mann_whitney_u(data)
    rho = spearman(data.values, data.labels)
    if reference_labels is None:
        if threshold is None:
            threshold = float(np.median(data.values))
        reference_labels = (data.values > threshold).astype(int)
        phi_against = f"values > {threshold!r}"
    else:
        phi_against = "reference labels"
    try:
        phi_value = phi(ContingencyTable2x2.from_labels(data.labels, reference_labels))
    except UndefinedCorrelation:
        phi_value = None
    return {
        "n": int(data.values.size),
        "n1": data.n1,
        "n0": data.n0,
        "spearman": rho,
        "phi": phi_value,
        "phi_against": phi_against,
        "rank_biserial": normalized,
        "rank_biserial_mean_rank_difference": raw,
        "mann_whitney_u": {"u_statistic": mwu.u_statistic, "p_value": mwu.p_value, "mode": mwu.mode},
    }
