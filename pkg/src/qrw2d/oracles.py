"""Independent reference computations used to cross-check the fast paths.

Nothing here shares code with the simulator or the stationary-phase pipeline.
"""

from __future__ import annotations

import numpy as np

from .model import STEPS, CoinModel


def matrix_power_coefficients(model: CoinModel, n: int) -> list[list[dict]]:
    """[(M U)^n]_{ij} as dicts {(r, s): coefficient}, by repeated Laurent-matrix products."""
    u = model.coin
    one_step = [[{STEPS[i]: complex(u[i, k])} if u[i, k] != 0 else {} for k in range(4)]
                for i in range(4)]
    power = [[({(0, 0): 1.0 + 0j} if i == k else {}) for k in range(4)] for i in range(4)]
    for _ in range(n):
        power = _matmul(power, one_step)
    return power


def _matmul(a, b):
    out = [[{} for _ in range(4)] for _ in range(4)]
    for i in range(4):
        for j in range(4):
            acc: dict = {}
            for k in range(4):
                for (r1, s1), v1 in a[i][k].items():
                    for (r2, s2), v2 in b[k][j].items():
                        key = (r1 + r2, s1 + s2)
                        acc[key] = acc.get(key, 0.0) + v1 * v2
            out[i][j] = acc
    return out


def matrix_power_field(model: CoinModel, start, n: int) -> np.ndarray:
    """Dense amplitude array [r+n, s+n, i] = sum_j [(MU)^n]_{ij}(r, s) * start_j."""
    start = np.asarray(start, dtype=np.complex128)
    coeffs = matrix_power_coefficients(model, n)
    out = np.zeros((2 * n + 1, 2 * n + 1, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            if start[j] == 0:
                continue
            for (r, s), v in coeffs[i][j].items():
                out[r + n, s + n, i] += v * start[j]
    return out


def fourier_amplitudes(model: CoinModel, start, n: int, grid: int | None = None) -> np.ndarray:
    """Exact amplitudes at time n via the spectral decomposition of M(x, y) U.

    For (x, y) on the torus, (M U)^n = sum_k lambda_k^n P_k with P_k the
    eigenprojectors; the lattice amplitudes are the Fourier coefficients of this
    matrix function, recovered exactly by an FFT on a grid finer than 2n+1.
    """
    start = np.asarray(start, dtype=np.complex128)
    grid = grid or (2 * n + 2)
    th = 2 * np.pi * np.arange(grid) / grid
    x = np.exp(1j * th)[:, None]
    y = np.exp(1j * th)[None, :]
    m = np.stack(np.broadcast_arrays(x, 1 / x, y, 1 / y), axis=-1)
    mu = m[..., :, None] * model.coin
    lam, vec = np.linalg.eig(mu)
    inv = np.linalg.inv(vec)
    vals = np.einsum("abik,abk,abkj,j->abi", vec, lam ** n, inv, start)
    # coefficient of x^r y^s is the mean of vals * x^-r y^-s
    coef = np.fft.fft2(vals, axes=(0, 1)) / grid ** 2
    idx = np.arange(-n, n + 1) % grid
    return coef[np.ix_(idx, idx)]
