"""Spacetime generating function: denominator H, numerators G, and z-roots on the torus.

H is stored cleared of negative exponents, H = x*y*det(I - z M U), and every
numerator carries the same x*y factor, so G/H is unchanged.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .laurent import LaurentPoly3, evaluate
from .model import CoinModel

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class TorusPoint3:
    alpha: float
    beta: float
    gamma: float

    @classmethod
    def from_xyz(cls, x, y, z) -> "TorusPoint3":
        return cls(*(float(np.angle(w) % TWO_PI) for w in (x, y, z)))

    @property
    def x(self) -> complex:
        return complex(np.exp(1j * self.alpha))

    @property
    def y(self) -> complex:
        return complex(np.exp(1j * self.beta))

    @property
    def z(self) -> complex:
        return complex(np.exp(1j * self.gamma))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


def step_monomials() -> list[LaurentPoly3]:
    """Diagonal of M: x, 1/x, y, 1/y."""
    return [
        LaurentPoly3.monomial(1, 0, 0),
        LaurentPoly3.monomial(-1, 0, 0),
        LaurentPoly3.monomial(0, 1, 0),
        LaurentPoly3.monomial(0, -1, 0),
    ]


def transfer_matrix(model: CoinModel) -> list[list[LaurentPoly3]]:
    """Entries of I - z M U as Laurent polynomials."""
    m = step_monomials()
    u = model.coin
    rows = []
    for i in range(4):
        row = []
        for k in range(4):
            entry = (m[i] * complex(-u[i, k])).shift(0, 0, 1)
            if i == k:
                entry = entry + 1.0
            row.append(entry)
        rows.append(row)
    return rows


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def poly_det(mat: list[list[LaurentPoly3]]) -> LaurentPoly3:
    """Leibniz expansion of the determinant of a square matrix of polynomials."""
    n = len(mat)
    total = LaurentPoly3()
    for perm in itertools.permutations(range(n)):
        term = LaurentPoly3.constant(_perm_sign(perm))
        for i, j in enumerate(perm):
            term = term * mat[i][j]
            if term.is_zero():
                break
        total = total + term
    return total


@lru_cache(maxsize=64)
def build_H(model: CoinModel) -> LaurentPoly3:
    return poly_det(transfer_matrix(model)).shift(1, 1, 0)


@lru_cache(maxsize=256)
def build_G(model: CoinModel, i: int, j: int) -> LaurentPoly3:
    """Numerator of F^{(i,j)} = [(I - zMU)^{-1}]_{ij}, indices 1-based.

    The inverse is adj/det and adj_{ij} is the (j, i) cofactor.
    """
    if not (1 <= i <= 4 and 1 <= j <= 4):
        raise IndexError("chirality indices must be in 1..4")
    a = transfer_matrix(model)
    r, c = j - 1, i - 1
    minor = [[a[p][q] for q in range(4) if q != c] for p in range(4) if p != r]
    sign = -1 if (r + c) % 2 else 1
    return (poly_det(minor) * sign).shift(1, 1, 0)


def build_G_start(model: CoinModel, i: int, start) -> LaurentPoly3:
    """Numerator for chirality i when starting from the superposition ``start``."""
    total = LaurentPoly3()
    for j, c in enumerate(np.asarray(start, dtype=np.complex128), start=1):
        if c != 0:
            total = total + build_G(model, i, j) * complex(c)
    return total


def direct_H(model: CoinModel, x, y, z):
    """x*y*det(I - z M(x,y) U) by dense linear algebra, for cross-checking build_H."""
    x, y, z = np.broadcast_arrays(*(np.asarray(w, dtype=np.complex128) for w in (x, y, z)))
    m = np.stack([x, 1 / x, y, 1 / y], axis=-1)
    mu = m[..., :, None] * model.coin
    a = np.eye(4) - z[..., None, None] * mu
    return x * y * np.linalg.det(a)


# roots in z -----------------------------------------------------------------

def roots_in_z(p: LaurentPoly3, x, y, *, polish: bool = True) -> np.ndarray:
    """All roots in z of p(x, y, .) via companion-matrix eigenvalues.

    Roots are sorted by argument in [0, 2*pi); the result has trailing axis equal
    to the z-degree.  A vanishing leading coefficient lowers the degree (with a
    warning).
    """
    coeffs = p.z_coefficients(x, y)
    scale = np.max(np.abs(coeffs))
    while coeffs.shape[-1] > 1 and np.max(np.abs(coeffs[..., -1])) <= 1e-14 * max(scale, 1e-300):
        warnings.warn("leading z coefficient vanishes; reducing degree", RuntimeWarning)
        coeffs = coeffs[..., :-1]
    deg = coeffs.shape[-1] - 1
    if deg < 1:
        return np.zeros(coeffs.shape[:-1] + (0,), dtype=np.complex128)
    lead = coeffs[..., -1:]
    monic = coeffs[..., :-1] / lead
    comp = np.zeros(coeffs.shape[:-1] + (deg, deg), dtype=np.complex128)
    comp[..., np.arange(1, deg), np.arange(deg - 1)] = 1.0
    comp[..., :, -1] = -monic
    roots = np.linalg.eigvals(comp)
    if polish:
        roots = _newton_polish(coeffs, roots)
    order = np.argsort(np.angle(roots) % TWO_PI, axis=-1)
    return np.take_along_axis(roots, order, axis=-1)


def _polyval_with_derivative(coeffs, z):
    deg = coeffs.shape[-1] - 1
    val = np.zeros_like(z)
    der = np.zeros_like(z)
    for k in range(deg, -1, -1):
        der = der * z + val
        val = val * z + coeffs[..., k:k + 1]
    return val, der


def _newton_polish(coeffs, roots):
    val, der = _polyval_with_derivative(coeffs, roots)
    safe = np.abs(der) > 1e-12 * np.max(np.abs(coeffs), axis=-1, keepdims=True)
    delta = np.where(safe, val / np.where(safe, der, 1.0), 0.0)
    new = roots - delta
    # keep the polished root only when it actually reduces the residual
    val_new, _ = _polyval_with_derivative(coeffs, new)
    return np.where(np.abs(val_new) <= np.abs(val), new, roots)


def check_torality(model: CoinModel, samples: int = 10_000, seed: int = 0) -> dict:
    """Largest deviation of |z| from 1 over z-roots above random torus points (x, y)."""
    rng = np.random.default_rng(seed)
    ab = rng.uniform(0.0, TWO_PI, size=(samples, 2))
    x = np.exp(1j * ab[:, 0])
    y = np.exp(1j * ab[:, 1])
    roots = roots_in_z(build_H(model), x, y)
    dev = np.abs(np.abs(roots) - 1.0)
    worst = np.unravel_index(np.argmax(dev), dev.shape)
    return {
        "max_deviation": float(dev[worst]),
        "worst_alpha": float(ab[worst[0], 0]),
        "worst_beta": float(ab[worst[0], 1]),
        "worst_z": complex(roots[worst]),
        "samples": int(samples),
    }


def series_coefficients(G: LaurentPoly3, H: LaurentPoly3, order: int) -> list[LaurentPoly3]:
    """Power-series coefficients (in z) of G/H up to z^order, as polynomials in x, y.

    Uses that the z^0 part of H is a monomial in (x, y); the coefficients are
    returned with that monomial divided out.
    """
    h = _z_slices(H)
    g = _z_slices(G)
    h0 = h.get(0)
    if h0 is None or len(h0) != 1:
        raise ValueError("z^0 part of H must be a single monomial")
    ((a0, b0, _), c0), = h0.terms.items()
    inv_h0 = LaurentPoly3.monomial(-a0, -b0, 0, 1.0 / c0)
    out: list[LaurentPoly3] = []
    for n in range(order + 1):
        acc = g.get(n, LaurentPoly3())
        for k in range(1, n + 1):
            if k in h:
                acc = acc - h[k] * out[n - k]
        out.append(acc * inv_h0)
    return out


def _z_slices(p: LaurentPoly3) -> dict[int, LaurentPoly3]:
    slices: dict[int, dict] = {}
    for (a, b, c), v in p:
        slices.setdefault(c, {})[(a, b, 0)] = v
    return {c: LaurentPoly3(t) for c, t in slices.items()}


def eval_on_torus(p: LaurentPoly3, alpha, beta, gamma):
    return evaluate(p, np.exp(1j * np.asarray(alpha)), np.exp(1j * np.asarray(beta)),
                    np.exp(1j * np.asarray(gamma)))
