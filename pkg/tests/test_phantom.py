import numpy as np
import pytest

from rockentropy.attributes import AttributeKind
from rockentropy.errors import InvalidSpec
from rockentropy.phantom import PhantomSpec, generate, graded_suite, ordering_suite, write_phantom
from rockentropy.ranking import rank_volumes
from rockentropy.volume_io import is_high_density, load_volume, read_manifest


def test_deterministic():
    for kind in ("uniform_noise", "layered", "blobs"):
        a = generate(PhantomSpec(kind, (20, 22, 24), 8, 42)).voxels
        b = generate(PhantomSpec(kind, (20, 22, 24), 8, 42)).voxels
        c = generate(PhantomSpec(kind, (20, 22, 24), 8, 43)).voxels
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        assert a.shape == (20, 22, 24)


def test_noise():
    v = generate(PhantomSpec("uniform_noise", (32, 32, 32), 8, 1, {"std": 0}))
    assert np.all(v.voxels == 128)
    v = generate(PhantomSpec("uniform_noise", (32, 32, 32), 8, 1))
    assert abs(v.voxels.mean() - 128) < 1
    assert abs(v.voxels.std() - 10) < 0.5


def test_layered():
    v = generate(PhantomSpec("layered", (8, 8, 10), 8, 0, {"levels": [50, 200], "std": 0}))
    assert set(np.unique(v.voxels)) == {50, 200}
    assert np.all(v.voxels[:, :, :5] == 50) and np.all(v.voxels[:, :, 5:] == 200)
    for params in ({"levels": [100]}, {"levels": [9, 9]}, {"levels": [0, 300]}):
        with pytest.raises(InvalidSpec):
            generate(PhantomSpec("layered", (8, 8, 8), 8, 0, params))
    with pytest.raises(InvalidSpec):
        generate(PhantomSpec("layered", (8, 8, 2), 8, 0, {"levels": [1, 2, 3]}))


def test_spec_errors():
    with pytest.raises(InvalidSpec):
        generate(PhantomSpec("marble"))
    with pytest.raises(InvalidSpec):
        generate(PhantomSpec("uniform_noise", bit_depth=12))
    with pytest.raises(InvalidSpec):
        generate(PhantomSpec("blobs", (10, 10, 10), params={"radius": 6}))


def test_blobs():
    v = generate(PhantomSpec("blobs", (24, 24, 24), 8, 0, {"n_blobs": 0, "std": 0}))
    assert np.all(v.voxels == 120)
    v = generate(PhantomSpec("blobs", (24, 24, 24), 8, 0, {"std": 0, "n_blobs": 3, "radius": 3}))
    assert set(np.unique(v.voxels)) == {120, 200}
    v = generate(PhantomSpec("blobs", (32, 32, 32), 16, 0,
                             {"background": 30000, "intensity": 65000, "std": 200, "n_blobs": 2, "radius": 4}))
    assert is_high_density(v)


def test_more_layers_more_entropy():
    wins = 0
    for seed in range(10):
        vols = {
            "two": generate(PhantomSpec("layered", (40, 40, 40), 8, seed, {"levels": [80, 176]})),
            "four": generate(PhantomSpec("layered", (40, 40, 40), 8, seed + 100,
                                         {"levels": [60, 110, 160, 210]})),
            "flat": generate(PhantomSpec("uniform_noise", (40, 40, 40), 8, seed + 200)),
        }
        res = rank_volumes(vols, 8, ["mean"])[0]
        h = {c.sample_id: c.entropy_bits for c in res.coefficients}
        wins += h["four"] > h["two"] > h["flat"]
    assert wins == 10


def test_blob_count_ordering():
    vols = {
        "many": generate(PhantomSpec("blobs", (48, 48, 48), 8, 3)),
        "none": generate(PhantomSpec("blobs", (48, 48, 48), 8, 4, {"n_blobs": 0})),
    }
    for kind in ("mean", "std_dev"):
        res = rank_volumes(vols, 4, [kind])[0]
        q = {c.sample_id: c.quantile_prob for c in res.coefficients}
        assert q["many"] > q["none"]


def test_suites_and_writer(tmp_path):
    assert [s for s, _ in ordering_suite(3)] == ["noise_s3", "layered_s3", "blobs_s3"]
    g = graded_suite(1)
    assert len(g) == 9 and len({spec.seed for _, spec in g}) == 9
    spec = PhantomSpec("blobs", (16, 18, 20), 16, 9, {"radius": 3, "background": 1000, "intensity": 5000})
    path = write_phantom(spec, str(tmp_path), "b9")
    m = read_manifest(path)
    assert m.dims == (16, 18, 20) and m.bit_depth == 16
    np.testing.assert_array_equal(load_volume(m).voxels, generate(spec).voxels)
