import numpy as np
import pytest

from rockentropy.volume_io import Manifest, Voi, Volume, write_manifest, write_volume


def make_volume(arr, bit_depth=None):
    arr = np.asarray(arr)
    if bit_depth is None:
        bit_depth = 8 if arr.max(initial=0) < 256 else 16
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    return Volume(arr.astype(dtype), bit_depth)


@pytest.fixture
def write_sample(tmp_path):
    """Write a volume + manifest pair into tmp_path and return the manifest path."""

    def _write(sample_id, volume, voi=None, endianness="little"):
        raw = f"{sample_id}.raw"
        write_volume(volume, str(tmp_path / raw), endianness)
        m = Manifest(sample_id, raw, volume.bit_depth, volume.dims, 1.0, endianness,
                     voi if voi is not None else Voi.full(volume.dims))
        path = tmp_path / f"{sample_id}.json"
        write_manifest(m, str(path))
        return str(path)

    return _write


# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
