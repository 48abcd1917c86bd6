"""Exact discrete-time evolution of the walk on a dense lattice box.

Convention: starting from the basis chirality e_j, the amplitude at site (r, s)
in chirality i after n steps equals the x^r y^s coefficient of [(M U)^n]_{ij},
i.e. of the z^n term of [(I - z M U)^{-1}]_{ij}.  One step applies the coin and
then moves chirality i by its own step vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import CoinModel

NORM_TOL = 1e-12


@dataclass(frozen=True)
class WaveField:
    """Amplitudes ``amps[r + n, s + n, j]`` for r, s in [-n, n] at time n."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        side = 2 * self.n + 1
        if self.amps.shape != (side, side, 4):
            raise ValueError(f"amps must have shape {(side, side, 4)}, got {self.amps.shape}")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    @property
    def coords(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)


def initial(start) -> WaveField:
    start = np.asarray(start, dtype=np.complex128).reshape(-1)
    if start.shape != (4,):
        raise ValueError("start must be a complex 4-vector")
    nrm = np.linalg.norm(start)
    if abs(nrm - 1.0) > NORM_TOL:
        raise ValueError(f"start vector must have unit norm, got {nrm!r}")
    amps = np.zeros((1, 1, 4), dtype=np.complex128)
    amps[0, 0, :] = start
    return WaveField(0, amps)


def basis(j: int) -> np.ndarray:
    """Unit chirality vector e_j, with j counted from 1."""
    e = np.zeros(4, dtype=np.complex128)
    e[j - 1] = 1.0
    return e


def _embed(field: WaveField, half: int) -> np.ndarray:
    box = np.zeros((2 * half + 1, 2 * half + 1, 4), dtype=np.complex128)
    off = half - field.n
    side = 2 * field.n + 1
    box[off:off + side, off:off + side, :] = field.amps
    return box


def _crop(box: np.ndarray, half: int, n: int) -> np.ndarray:
    off = half - n
    side = 2 * n + 1
    return np.ascontiguousarray(box[off:off + side, off:off + side, :])


def _run(field: WaveField, u: np.ndarray, steps: int) -> WaveField:
    n0 = field.n
    n1 = n0 + steps
    half = n1 + 2
    a = _embed(field, half)
    b = np.zeros_like(a)
    kernel = _kernels.step_kernel()
    u = np.ascontiguousarray(u, dtype=np.complex128)
    for n in range(n0, n1):
        kernel(a, b, u, n, half)
        a, b = b, a
    return WaveField(n1, _crop(a, half, n1))


def step(field: WaveField, model: CoinModel) -> WaveField:
    return _run(field, model.coin, 1)


def evolve(model: CoinModel, start, n: int) -> WaveField:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _run(initial(start), model.coin, int(n))


def probability_profile(field: WaveField) -> np.ndarray:
    """P[r + n, s + n] = sum_j |amps(r, s, j)|^2."""
    return np.sum(field.amps.real ** 2 + field.amps.imag ** 2, axis=-1)


def amplitude_at(field: WaveField, r: int, s: int, j: int) -> complex:
    """Amplitude at site (r, s) in chirality j (1-based); zero outside the stored box."""
    if not 1 <= j <= 4:
        raise IndexError("chirality index must be in 1..4")
    n = field.n
    if abs(r) > n or abs(s) > n:
        return 0j
    return complex(field.amps[r + n, s + n, j - 1])


def site_probability(field: WaveField, r: int, s: int) -> float:
    n = field.n
    if abs(r) > n or abs(s) > n:
        return 0.0
    return float(np.sum(np.abs(field.amps[r + n, s + n, :]) ** 2))
