"""Hot inner loops: one walk step on a dense box, and 2-D point binning.

Each kernel has a numba version and a numpy version with identical semantics.
The numba path is used when numba imports and ``QRW2D_DISABLE_NUMBA`` is unset.
"""

from __future__ import annotations

import numpy as np

from .config import numba_requested
from .model import STEPS

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_DX = np.array([s[0] for s in STEPS], dtype=np.int64)
_DY = np.array([s[1] for s in STEPS], dtype=np.int64)


def step_numpy(old, new, u, n, half):
    """Write time n+1 amplitudes into ``new`` from time-n amplitudes in ``old``.

    Arrays have shape (2*half+1, 2*half+1, 4) with the origin at index ``half``;
    requires half >= n + 2 so shifted reads stay in bounds.
    """
    lo, hi = half - n - 1, half + n + 2
    new[lo:hi, lo:hi, :] = 0
    for i in range(4):
        dx, dy = _DX[i], _DY[i]
        src = old[lo - dx:hi - dx, lo - dy:hi - dy, :]
        new[lo:hi, lo:hi, i] = src @ u[i]


def bin_points_numpy(px, py, lo, hi, size):
    counts = np.zeros((size, size), dtype=np.int64)
    scale = size / (hi - lo)
    ix = np.floor((px - lo) * scale).astype(np.int64)
    iy = np.floor((py - lo) * scale).astype(np.int64)
    ok = (ix >= 0) & (ix < size) & (iy >= 0) & (iy < size)
    np.add.at(counts, (iy[ok], ix[ok]), 1)
    return counts


if HAVE_NUMBA:

    @njit(cache=True)
    def _step_nb(old, new, u, n, half, dx, dy):
        m = n + 1
        for r in range(-m, m + 1):
            rem = m - abs(r)
            # only sites with |r|+|s| <= m and r+s = m (mod 2) can be nonzero
            for s in range(-rem, rem + 1, 2):
                R = r + half
                S = s + half
                for i in range(4):
                    sr = R - dx[i]
                    ss = S - dy[i]
                    acc = 0j
                    for k in range(4):
                        acc += u[i, k] * old[sr, ss, k]
                    new[R, S, i] = acc

    @njit(cache=True)
    def _bin_nb(px, py, lo, hi, size):
        counts = np.zeros((size, size), dtype=np.int64)
        scale = size / (hi - lo)
        for k in range(px.shape[0]):
            fx = (px[k] - lo) * scale
            fy = (py[k] - lo) * scale
            if fx < 0 or fy < 0:
                continue
            ix = int(fx)
            iy = int(fy)
            if ix < size and iy < size:
                counts[iy, ix] += 1
        return counts

    def step_numba(old, new, u, n, half):
        _step_nb(old, new, np.ascontiguousarray(u, dtype=np.complex128), n, half, _DX, _DY)

    def bin_points_numba(px, py, lo, hi, size):
        return _bin_nb(
            np.ascontiguousarray(px, dtype=np.float64),
            np.ascontiguousarray(py, dtype=np.float64),
            float(lo),
            float(hi),
            int(size),
        )


def using_numba() -> bool:
    return HAVE_NUMBA and numba_requested()


def step_kernel():
    return step_numba if using_numba() else step_numpy


def bin_kernel():
    return bin_points_numba if using_numba() else bin_points_numpy
