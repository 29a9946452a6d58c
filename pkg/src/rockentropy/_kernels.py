"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``ROCKENTROPY_DISABLE_NUMBA``
is unset (or ``0``).  Both paths are always importable as
``<name>_numba`` / ``<name>_numpy`` so tests and benchmarks can compare them;
the un-suffixed names are the ones selected for the current process.
"""

import math
import os

import numpy as np

_DISABLED = os.environ.get("ROCKENTROPY_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by ROCKENTROPY_DISABLE_NUMBA")
    import numba
    from numba import njit, prange

    # the bundled TBB is too old for numba and only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    prange = range

# Columns of the block statistics table.
MIN, MAX, MEDIAN, MEAN, M2, M3, M4 = range(7)
N_STATS = 7

# Beyond this many bandwidths exp(-x^2/2) underflows to exactly 0.0.
KDE_CUTOFF = 40.0

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ----------------------------------------------------------------------------
# block statistics
# ----------------------------------------------------------------------------
def _moments_numpy(blocks, want_median):
    """Stats table for a ``(n_blocks, n_voxels)`` float64 array."""
    out = np.empty((blocks.shape[0], N_STATS))
    out[:, MIN] = blocks.min(axis=1)
    out[:, MAX] = blocks.max(axis=1)
    n = blocks.shape[1]
    if want_median:
        out[:, MEDIAN] = np.partition(blocks, (n - 1) // 2, axis=1)[:, (n - 1) // 2]
    else:
        out[:, MEDIAN] = np.nan
    mean = blocks.sum(axis=1) / n
    dev = blocks - mean[:, None]
    dev2 = dev * dev
    out[:, MEAN] = mean
    out[:, M2] = dev2.sum(axis=1) / n
    out[:, M3] = (dev2 * dev).sum(axis=1) / n
    out[:, M4] = (dev2 * dev2).sum(axis=1) / n
    return out


def block_stats_numpy(vol, s, d, nz, want_median=True):
    """Per-subcube statistics of a 3D ``(x, y, z)`` array.

    Returns an array of shape ``(d * d * nz, 7)``; row ``(i * d + j) * nz + k``
    holds the block whose origin is ``(i*s, j*s, k*s)``.
    """
    out = np.empty((d, d, nz, N_STATS))
    for k in range(nz):
        slab = np.asarray(vol[: d * s, : d * s, k * s:(k + 1) * s], dtype=np.float64)
        blocks = slab.reshape(d, s, d, s, s).transpose(0, 2, 1, 3, 4).reshape(d * d, s ** 3)
        out[:, :, k, :] = _moments_numpy(blocks, want_median).reshape(d, d, N_STATS)
    return out.reshape(d * d * nz, N_STATS)


def _block_stats_py(vol, s, d, nz, want_median=True):
    nb = d * d * nz
    n = s * s * s
    out = np.empty((nb, N_STATS))
    for b in prange(nb):
        i = b // (d * nz)
        j = (b // nz) % d
        k = b % nz
        buf = np.empty(n)
        t = 0
        for x in range(i * s, i * s + s):
            for y in range(j * s, j * s + s):
                for z in range(k * s, k * s + s):
                    buf[t] = vol[x, y, z]
                    t += 1
        lo = buf[0]
        hi = buf[0]
        total = 0.0
        for t in range(n):
            v = buf[t]
            total += v
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        mean = total / n
        m2 = 0.0
        m3 = 0.0
        m4 = 0.0
        for t in range(n):
            dv = buf[t] - mean
            dv2 = dv * dv
            m2 += dv2
            m3 += dv2 * dv
            m4 += dv2 * dv2
        out[b, MIN] = lo
        out[b, MAX] = hi
        if want_median:
            out[b, MEDIAN] = np.partition(buf, (n - 1) // 2)[(n - 1) // 2]
        else:
            out[b, MEDIAN] = np.nan
        out[b, MEAN] = mean
        out[b, M2] = m2 / n
        out[b, M3] = m3 / n
        out[b, M4] = m4 / n
    return out


# ----------------------------------------------------------------------------
# Gaussian KDE on a grid
# ----------------------------------------------------------------------------
def kde_on_grid_numpy(points, grid, bandwidth):
    """Gaussian KDE of sorted ``points`` evaluated at every ``grid`` node."""
    points = np.asarray(points, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    dens = np.empty(grid.size)
    step = max(1, 4_000_000 // max(points.size, 1))
    for start in range(0, grid.size, step):
        g = grid[start:start + step]
        u = (g[:, None] - points[None, :]) / bandwidth
        dens[start:start + step] = np.exp(-0.5 * u * u).sum(axis=1)
    return dens * (_INV_SQRT_2PI / (bandwidth * points.size))


def _kde_on_grid_py(points, grid, bandwidth):
    n = points.size
    reach = KDE_CUTOFF * bandwidth
    dens = np.empty(grid.size)
    lo_all = np.searchsorted(points, grid - reach)
    hi_all = np.searchsorted(points, grid + reach)
    for g in prange(grid.size):
        acc = 0.0
        x = grid[g]
        for t in range(lo_all[g], hi_all[g]):
            u = (x - points[t]) / bandwidth
            acc += math.exp(-0.5 * u * u)
        dens[g] = acc
    return dens * (_INV_SQRT_2PI / (bandwidth * n))


# ----------------------------------------------------------------------------
# co-occurrence counting
# ----------------------------------------------------------------------------
def cooccurrence_numpy(q, dr, dc, levels):
    """Counts of ``(q[r, c], q[r + dr, c + dc])`` pairs; ``dr, dc >= 0``."""
    rows, cols = q.shape
    a = q[: rows - dr, : cols - dc]
    b = q[dr:, dc:]
    idx = a.astype(np.int64).ravel() * levels + b.astype(np.int64).ravel()
    return np.bincount(idx, minlength=levels * levels).reshape(levels, levels).astype(np.float64)


def _cooccurrence_py(q, dr, dc, levels):
    rows, cols = q.shape
    counts = np.zeros((levels, levels))
    for r in range(rows - dr):
        for c in range(cols - dc):
            counts[q[r, c], q[r + dr, c + dc]] += 1.0
    return counts


if HAS_NUMBA:
    block_stats_numba = njit(parallel=True, cache=True)(_block_stats_py)
    kde_on_grid_numba = njit(parallel=True, cache=True)(_kde_on_grid_py)
    cooccurrence_numba = njit(cache=True)(_cooccurrence_py)

    block_stats = block_stats_numba
    kde_on_grid = kde_on_grid_numba
    cooccurrence = cooccurrence_numba
else:
    block_stats_numba = kde_on_grid_numba = cooccurrence_numba = None

    block_stats = block_stats_numpy
    kde_on_grid = kde_on_grid_numpy
    cooccurrence = cooccurrence_numpy


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if HAS_NUMBA else "numpy"
