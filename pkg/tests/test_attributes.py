import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_volume
from rockentropy.attributes import (
    AttributeKind,
    AttributeTable,
    compute_attribute,
    compute_attribute_table,
    read_attribute_csv,
    standardize,
    write_attribute_csv,
)
from rockentropy.errors import ConstantDataset, DegenerateAttribute
from rockentropy.partition import plan_subcubes, subcube_voxels

ALL = list(AttributeKind)


def naive(values, kind):
    """Textbook definitions in plain Python, used as the reference."""
    xs = [float(v) for v in values]
    n = len(xs)
    srt = sorted(xs)
    mean = sum(xs) / n
    m2 = sum((x - mean) ** 2 for x in xs) / n
    m3 = sum((x - mean) ** 3 for x in xs) / n
    m4 = sum((x - mean) ** 4 for x in xs) / n
    return {
        "minimum": lambda: srt[0],
        "maximum": lambda: srt[-1],
        "median": lambda: srt[(n - 1) // 2],
        "mean": lambda: mean,
        "std_dev": lambda: math.sqrt(m2),
        "coeff_var": lambda: math.sqrt(m2) / mean,
        "skewness": lambda: m3 / m2 ** 1.5,
        "kurtosis": lambda: m4 / m2 ** 2 - 3.0,
    }[kind.value]()


def test_classes():
    assert [k.value for k in ALL if k.discrete] == ["minimum", "maximum", "median"]
    assert AttributeKind.parse("STD_DEV") is AttributeKind.STD_DEV
    with pytest.raises(ValueError):
        AttributeKind.parse("variance")


def test_constant_block():
    v = [5, 5, 5, 5]
    for k in ("minimum", "maximum", "median", "mean"):
        assert compute_attribute(v, k) == 5
    assert compute_attribute(v, "std_dev") == 0
    for k in ("skewness", "kurtosis"):
        with pytest.raises(DegenerateAttribute):
            compute_attribute(v, k)


def test_two_point():
    assert compute_attribute([0, 10], "mean") == 5
    assert compute_attribute([0, 10], "std_dev") == 5
    assert compute_attribute([0, 10], "coeff_var") == 1.0


def test_zero_mean_coeff_var():
    with pytest.raises(DegenerateAttribute):
        compute_attribute([0, 0, 0], "coeff_var")


def test_one_to_four():
    v = [1, 2, 3, 4]
    assert compute_attribute(v, "median") == 2
    assert compute_attribute(v, "skewness") == pytest.approx(0.0, abs=1e-15)
    # m2 = 1.25 and m4 = 2.5625, so 2.5625 / 1.5625 - 3
    assert naive(v, AttributeKind.KURTOSIS) == pytest.approx(-1.36, abs=1e-12)
    assert compute_attribute(v, "kurtosis") == pytest.approx(-1.36, abs=1e-12)


def test_empty():
    with pytest.raises(ValueError):
        compute_attribute([], "mean")


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 65535), min_size=2, max_size=125), st.sampled_from(ALL))
def test_matches_naive(values, kind):
    try:
        expected = naive(values, kind)
    except ZeroDivisionError:
        with pytest.raises(DegenerateAttribute):
            compute_attribute(values, kind)
        return
    assert compute_attribute(values, kind) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 255), min_size=3, max_size=60), st.randoms(use_true_random=False))
def test_permutation_invariant(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    for kind in ALL:
        try:
            a = compute_attribute(values, kind)
        except DegenerateAttribute:
            continue
        assert compute_attribute(shuffled, kind) == pytest.approx(a, rel=1e-12, abs=1e-12)


def test_affine_behaviour():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 1000, size=200).astype(float)
    a, b = 3.5, 17.0
    y = a * x + b
    assert compute_attribute(y, "mean") == pytest.approx(a * compute_attribute(x, "mean") + b, rel=1e-12)
    assert compute_attribute(y, "std_dev") == pytest.approx(a * compute_attribute(x, "std_dev"), rel=1e-12)
    for k in ("skewness", "kurtosis"):
        assert compute_attribute(y, k) == pytest.approx(compute_attribute(x, k), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("kind", ALL)
def test_table_matches_per_subcube(kind):
    rng = np.random.default_rng(11)
    vol = make_volume(rng.integers(1, 60000, size=(13, 13, 17)), 16)
    grid = plan_subcubes(vol.dims, 3)
    table = compute_attribute_table(vol, grid, kind, "r")
    assert len(table.values) == grid.n_subcubes
    for b in range(grid.n_subcubes):
        vox = subcube_voxels(vol, grid, grid.unflat_index(b))
        assert table.values[b] == pytest.approx(naive(vox, kind), rel=1e-12)


def test_table_constant_and_range():
    vol = make_volume(np.full((8, 8, 8), 42))
    grid = plan_subcubes(vol.dims, 2)
    assert set(compute_attribute_table(vol, grid, "mean").values) == {42.0}
    rng = np.random.default_rng(2)
    vol = make_volume(rng.integers(10, 200, size=(9, 9, 9)))
    vals = compute_attribute_table(vol, plan_subcubes(vol.dims, 3), "minimum").values
    assert vals.min() >= vol.voxels.min() and vals.max() <= vol.voxels.max()


def test_table_two_layers():
    arr = np.zeros((8, 8, 8))
    arr[:, :, 4:] = 100
    vol = make_volume(arr)
    vals = compute_attribute_table(vol, plan_subcubes(vol.dims, 2), "mean").values
    # subcubes with k == 0 sit in the lower half, k == 1 in the upper one
    assert sorted(set(vals.tolist())) == [0.0, 100.0]
    assert list(vals) == [0.0, 100.0] * 4


def test_table_degenerate_raises():
    vol = make_volume(np.full((4, 4, 4), 9))
    with pytest.raises(DegenerateAttribute):
        compute_attribute_table(vol, plan_subcubes(vol.dims, 2), "kurtosis")


def _table(values, sid="s", kind=AttributeKind.MEAN, d=2):
    return AttributeTable(sid, kind, d, np.asarray(values, dtype=float))


def test_standardize_examples():
    (t,), st_ = standardize([_table([0, 2])])
    np.testing.assert_allclose(t.standardized, [-1, 1])
    out, st_ = standardize([_table([0, 0], "a"), _table([2, 2], "b")])
    assert (st_.mu, st_.sigma, st_.n) == (1.0, 1.0, 4)
    np.testing.assert_allclose(out[0].standardized, [-1, -1])
    np.testing.assert_allclose(out[1].standardized, [1, 1])


def test_standardize_errors():
    with pytest.raises(ConstantDataset):
        standardize([_table([3, 3]), _table([3])])
    with pytest.raises(ConstantDataset):
        standardize([_table([3])])
    with pytest.raises(ValueError):
        standardize([_table([1, 2]), _table([1, 2], kind=AttributeKind.STD_DEV)])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=40), min_size=1, max_size=6),
       st.floats(0.01, 100), st.floats(-1e3, 1e3))
def test_standardize_pooled_moments_and_affine(groups, a, b):
    tables = [_table(g, f"s{i}") for i, g in enumerate(groups)]
    pooled = np.concatenate([t.values for t in tables])
    if pooled.size < 2 or np.ptp(pooled) < 1e-3:
        return
    out, _ = standardize(tables)
    z = np.concatenate([t.standardized for t in out])
    assert abs(z.mean()) < 1e-9
    assert abs(z.std() - 1) < 1e-9
    out2, _ = standardize([_table(a * g + b if len(g) else g, t.sample_id)
                           for g, t in zip([np.asarray(g) for g in groups], tables)])
    z2 = np.concatenate([t.standardized for t in out2])
    np.testing.assert_allclose(z2, z, atol=1e-9)


def test_standardize_order_independent():
    rng = np.random.default_rng(5)
    tables = [_table(rng.normal(size=50) * 1e3 + 1e6, f"s{i}") for i in range(5)]
    _, a = standardize(tables)
    _, b = standardize(tables[::-1])
    assert (a.mu, a.sigma) == (b.mu, b.sigma)


def test_csv_roundtrip(tmp_path):
    out, _ = standardize([_table([1, 2, 3], "a"), _table([5, 6], "b")])
    disc = _table([1, 1, 2], "c", AttributeKind.MEDIAN)
    path = tmp_path / "attrs.csv"
    write_attribute_csv(str(path), out + [disc])
    back = {(t.sample_id, t.attribute): t for t in read_attribute_csv(str(path))}
    np.testing.assert_array_equal(back[("a", AttributeKind.MEAN)].standardized, out[0].standardized)
    assert back[("c", AttributeKind.MEDIAN)].standardized is None
    assert path.read_text().splitlines()[0] == "sample_id,attribute,d,subcube_index,raw_value,z_value"
