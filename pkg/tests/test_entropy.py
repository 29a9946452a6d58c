import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rockentropy.attributes import AttributeKind, AttributeTable
from rockentropy.entropy import (
    EntropyRecord,
    KdeConfig,
    discrete_entropy,
    gaussian_entropy_bits,
    image_entropy,
    kde_entropy,
    read_entropy_csv,
    write_entropy_csv,
)
from rockentropy.errors import EmptyInput, MissingStandardization, NumericalInstability

H1 = 0.5 * math.log2(2 * math.pi * math.e)


def pmf_reference(values):
    counts = Counter(values)
    n = len(values)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def test_discrete_examples():
    assert discrete_entropy([7, 7, 7]) == 0.0
    assert discrete_entropy(list(range(8))) == pytest.approx(3.0, abs=1e-15)
    assert discrete_entropy(["a", "a", "b", "c"]) == pytest.approx(1.5, abs=1e-15)
    with pytest.raises(EmptyInput):
        discrete_entropy([])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 15), min_size=1, max_size=64))
def test_discrete_matches_reference_and_bounds(values):
    h = discrete_entropy(values)
    assert h == pytest.approx(pmf_reference(values), abs=1e-12)
    k = len(set(values))
    assert -1e-12 <= h <= math.log2(k) + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 15), min_size=1, max_size=64), st.integers(1, 1000), st.integers(-500, 500))
def test_discrete_relabel_invariant(values, scale, shift):
    assert discrete_entropy([scale * v + shift for v in values]) == pytest.approx(discrete_entropy(values), abs=1e-12)
    assert discrete_entropy(values[::-1]) == pytest.approx(discrete_entropy(values), abs=1e-12)


def test_discrete_uniform_attains_max():
    assert discrete_entropy([1, 2, 3, 1, 2, 3]) == pytest.approx(math.log2(3), abs=1e-15)
    assert discrete_entropy([1, 2, 3, 1]) < math.log2(3)


def test_kde_single_point():
    assert kde_entropy([0.0]) == pytest.approx(H1, abs=1e-3)
    assert gaussian_entropy_bits() == pytest.approx(2.0471, abs=1e-4)


def test_kde_separated_pair_adds_one_bit():
    assert kde_entropy([-50.0, 50.0]) == pytest.approx(H1 + 1.0, abs=1e-3)


@pytest.mark.slow
def test_kde_gaussian_sample():
    z = np.random.default_rng(12345).standard_normal(100_000)
    assert kde_entropy(z) == pytest.approx(0.5 * math.log2(4 * math.pi * math.e), abs=2e-2)


def test_kde_bandwidth_scaling():
    # one point under bandwidth h has entropy H1 + log2(h)
    assert kde_entropy([3.0], KdeConfig(bandwidth=2.0)) == pytest.approx(H1 + 1.0, abs=1e-6)


def test_kde_translation_and_permutation():
    z = np.random.default_rng(0).normal(size=300) * 2
    base = kde_entropy(z)
    assert kde_entropy(z + 12.75) == pytest.approx(base, abs=1e-6)
    assert kde_entropy(z[::-1]) == pytest.approx(base, abs=1e-12)


def test_kde_scale_sensitivity():
    z = np.linspace(-3, 3, 40)
    assert kde_entropy(2 * z) - kde_entropy(z) > 0.3


def test_kde_grid_refinement_stable():
    z = np.random.default_rng(4).normal(size=500)
    cfg = KdeConfig()
    a = kde_entropy(z, cfg)
    b = kde_entropy(z, KdeConfig(grid_points=2 * cfg.grid_points - 1))
    assert abs(a - b) < cfg.convergence_tol


def test_kde_coarse_grid_refines_itself():
    # 5 nodes over a 16-wide span is far too coarse; the loop must refine
    assert kde_entropy([0.0], KdeConfig(grid_points=5)) == pytest.approx(H1, abs=1e-3)


def test_kde_non_convergence():
    with pytest.raises(NumericalInstability):
        kde_entropy([0.0, 1e7], KdeConfig(grid_points=3, convergence_tol=1e-12))


def test_kde_errors():
    with pytest.raises(EmptyInput):
        kde_entropy([])
    with pytest.raises(NumericalInstability):
        kde_entropy([0.0, np.nan])
    with pytest.raises(ValueError):
        KdeConfig(grid_points=4)
    with pytest.raises(ValueError):
        KdeConfig(bandwidth=0)


def test_image_entropy_dispatch():
    t = AttributeTable("a", AttributeKind.MINIMUM, 2, np.full(8, 7.0))
    r = image_entropy(t)
    assert (r.entropy_bits, r.method) == (0.0, "pmf")
    t = AttributeTable("a", AttributeKind.MEAN, 2, np.array([5.0]), np.array([0.0]))
    r = image_entropy(t)
    assert r.method == "kde" and r.entropy_bits == pytest.approx(2.0471, abs=1e-3)
    t = AttributeTable("a", AttributeKind.MEDIAN, 2, np.array([1.0, 2.0]))
    assert image_entropy(t).entropy_bits == pytest.approx(1.0)
    with pytest.raises(MissingStandardization):
        image_entropy(AttributeTable("a", AttributeKind.STD_DEV, 2, np.array([1.0, 2.0])))


def test_entropy_csv_roundtrip(tmp_path):
    recs = [EntropyRecord("a", AttributeKind.MEAN, 5, 2.5, "kde"),
            EntropyRecord("b", AttributeKind.MAXIMUM, 5, 1.0, "pmf")]
    path = str(tmp_path / "e.csv")
    write_entropy_csv(path, recs)
    assert read_entropy_csv(path) == recs
