"""Sparse Laurent polynomials in three variables (x, y, z) with complex coefficients."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

DROP_TOL = 1e-15


class LaurentPoly3:
    """Immutable sparse Laurent polynomial ``sum c_{abc} x^a y^b z^c``.

    Coefficients with modulus below ``DROP_TOL`` are discarded on construction.
    Evaluation broadcasts over numpy arrays of x, y, z.
    """

    __slots__ = ("_terms", "_exps", "_coefs")

    def __init__(self, terms: Mapping[tuple[int, int, int], complex] | None = None):
        clean = {}
        for key, val in (terms or {}).items():
            val = complex(val)
            if abs(val) >= DROP_TOL:
                a, b, c = key
                clean[(int(a), int(b), int(c))] = val
        keys = sorted(clean)
        self._terms = {k: clean[k] for k in keys}
        self._exps = np.array(keys, dtype=np.int64).reshape(-1, 3)
        self._coefs = np.array([clean[k] for k in keys], dtype=np.complex128)

    # construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, c: complex) -> "LaurentPoly3":
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, a: int, b: int, c: int, coef: complex = 1.0) -> "LaurentPoly3":
        return cls({(a, b, c): coef})

    @property
    def terms(self) -> dict[tuple[int, int, int], complex]:
        return dict(self._terms)

    @property
    def exponents(self) -> np.ndarray:
        return self._exps.copy()

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefs.copy()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def degree_range(self, axis: int) -> tuple[int, int]:
        if self.is_zero():
            return (0, 0)
        col = self._exps[:, axis]
        return int(col.min()), int(col.max())

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0.0) + v
        return LaurentPoly3(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly3({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return LaurentPoly3({k: v * other for k, v in self._terms.items()})
        other = _coerce(other)
        out: dict[tuple[int, int, int], complex] = {}
        for (a1, b1, c1), v1 in self._terms.items():
            for (a2, b2, c2), v2 in other._terms.items():
                key = (a1 + a2, b1 + b2, c1 + c2)
                out[key] = out.get(key, 0.0) + v1 * v2
        return LaurentPoly3(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly3):
            return NotImplemented
        return self._terms == other._terms

    def __repr__(self):
        if self.is_zero():
            return "LaurentPoly3(0)"
        parts = [f"({v:.6g})*x^{a}y^{b}z^{c}" for (a, b, c), v in self._terms.items()]
        return "LaurentPoly3(" + " + ".join(parts) + ")"

    def shift(self, a: int, b: int, c: int) -> "LaurentPoly3":
        """Multiply by the monomial x^a y^b z^c."""
        return LaurentPoly3({(k[0] + a, k[1] + b, k[2] + c): v for k, v in self._terms.items()})

    def truncate_z(self, max_degree: int) -> "LaurentPoly3":
        return LaurentPoly3({k: v for k, v in self._terms.items() if k[2] <= max_degree})

    def max_abs_diff(self, other: "LaurentPoly3") -> float:
        keys = set(self._terms) | set(other._terms)
        if not keys:
            return 0.0
        return max(abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) for k in keys)

    # calculus -------------------------------------------------------------

    def diff(self, axis: int) -> "LaurentPoly3":
        """Ordinary partial derivative along x (0), y (1) or z (2)."""
        out = {}
        for k, v in self._terms.items():
            e = k[axis]
            if e:
                nk = list(k)
                nk[axis] -= 1
                out[tuple(nk)] = v * e
        return LaurentPoly3(out)

    def euler(self, px: int = 0, py: int = 0, pz: int = 0) -> "LaurentPoly3":
        """Apply (x d/dx)^px (y d/dy)^py (z d/dz)^pz."""
        return LaurentPoly3(
            {k: v * (k[0] ** px) * (k[1] ** py) * (k[2] ** pz) for k, v in self._terms.items()}
        )

    # evaluation -----------------------------------------------------------

    def __call__(self, x, y, z):
        return evaluate(self, x, y, z)

    def z_coefficients(self, x, y) -> np.ndarray:
        """Coefficients of the polynomial in z at fixed (x, y), lowest degree first.

        Requires nonnegative z exponents; the result has trailing axis of length
        ``max_z_degree + 1``.
        """
        lo, hi = self.degree_range(2)
        if lo < 0:
            raise ValueError("negative z exponents; shift the polynomial first")
        x = np.asarray(x, dtype=np.complex128)
        y = np.asarray(y, dtype=np.complex128)
        _check_nonzero(x, y)
        shape = np.broadcast(x, y).shape
        out = np.zeros(shape + (hi + 1,), dtype=np.complex128)
        for (a, b, c), v in self._terms.items():
            out[..., c] += v * x**a * y**b
        return out


def _coerce(p) -> LaurentPoly3:
    if isinstance(p, LaurentPoly3):
        return p
    return LaurentPoly3.constant(p)


def _check_nonzero(*arrs):
    for a in arrs:
        if np.any(np.asarray(a) == 0):
            raise ValueError("Laurent polynomial evaluated at a zero coordinate")


def monomial_table(exps: np.ndarray, x, y, z) -> np.ndarray:
    """Values of each monomial x^a y^b z^c at the given points; shape (..., m)."""
    x = np.asarray(x, dtype=np.complex128)[..., None]
    y = np.asarray(y, dtype=np.complex128)[..., None]
    z = np.asarray(z, dtype=np.complex128)[..., None]
    return x ** exps[:, 0] * y ** exps[:, 1] * z ** exps[:, 2]


def evaluate(p: LaurentPoly3, x, y, z):
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    _check_nonzero(x, y, z)
    if p.is_zero():
        return np.zeros(np.broadcast(x, y, z).shape, dtype=np.complex128)[()]
    vals = monomial_table(p._exps, x, y, z) @ p._coefs
    return vals[()]


def grad(p: LaurentPoly3, x, y, z) -> np.ndarray:
    """Ordinary gradient (dH/dx, dH/dy, dH/dz); trailing axis of length 3."""
    return np.stack([evaluate(p.diff(k), x, y, z) for k in range(3)], axis=-1)


def grad_log(p: LaurentPoly3, x, y, z) -> np.ndarray:
    """Logarithmic gradient (x dH/dx, y dH/dy, z dH/dz); trailing axis of length 3."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    _check_nonzero(x, y, z)
    weights = p._exps.astype(np.complex128) * p._coefs[:, None]
    return monomial_table(p._exps, x, y, z) @ weights


def euler_table(p: LaurentPoly3, orders: Iterable[tuple[int, int, int]], x, y, z) -> np.ndarray:
    """Evaluate several Euler derivatives of ``p`` at once; trailing axis indexes ``orders``."""
    orders = list(orders)
    e = p._exps.astype(np.float64)
    w = np.stack([e[:, 0] ** o[0] * e[:, 1] ** o[1] * e[:, 2] ** o[2] for o in orders], axis=1)
    weights = w.astype(np.complex128) * p._coefs[:, None]
    return monomial_table(p._exps, x, y, z) @ weights


# dump format --------------------------------------------------------------

def dumps(p: LaurentPoly3) -> str:
    """Text dump, one ``a b c re im`` line per term, sorted by exponent."""
    lines = [f"{a} {b} {c} {v.real!r} {v.imag!r}" for (a, b, c), v in sorted(p.terms.items())]
    return "\n".join(lines) + ("\n" if lines else "")


def loads(text: str) -> LaurentPoly3:
    terms = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        a, b, c, re, im = line.split()
        terms[(int(a), int(b), int(c))] = complex(float(re), float(im))
    return LaurentPoly3(terms)
