"""Nearest-neighbour step set, coin matrices and the one-parameter coin families."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Chirality order follows the diagonal of M = diag(x, 1/x, y, 1/y).
STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))

UNITARY_TOL = 1e-10


class DomainError(ValueError):
    """Parameter outside the admissible range of a coin family."""


class NotUnitaryError(ValueError):
    pass


@dataclass(frozen=True)
class StepSet:
    steps: tuple[tuple[int, int], ...] = STEPS

    def __post_init__(self):
        if tuple(self.steps) != STEPS:
            raise ValueError(f"only the nearest-neighbour step set {STEPS} is supported")

    @property
    def k(self) -> int:
        return len(self.steps)

    def as_array(self) -> np.ndarray:
        return np.array(self.steps, dtype=np.int64)


@dataclass(frozen=True)
class CoinModel:
    coin: np.ndarray
    family: str = "custom"
    t: float | None = None
    step_set: StepSet = field(default_factory=StepSet)

    def __post_init__(self):
        u = np.array(self.coin, dtype=np.complex128)
        if u.shape != (4, 4):
            raise ValueError(f"coin must be 4x4, got {u.shape}")
        u.setflags(write=False)
        object.__setattr__(self, "coin", u)

    @property
    def label(self) -> str:
        if self.t is None:
            return self.family
        return f"{self.family}({self.t:g})"

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.coin.imag == 0))

    def unitarity_defect(self) -> float:
        return unitarity_defect(self.coin)

    def to_descriptor(self) -> dict:
        if self.family in ("S", "A", "B"):
            return {"family": self.family, "t": self.t}
        if self.family == "grover":
            return {"family": "grover"}
        return {
            "family": "custom",
            "coin": [[[float(v.real), float(v.imag)] for v in row] for row in self.coin],
        }

    def __hash__(self):
        return hash((self.family, self.t, self.coin.tobytes()))

    def __eq__(self, other):
        if not isinstance(other, CoinModel):
            return NotImplemented
        return (
            self.family == other.family
            and self.t == other.t
            and np.array_equal(self.coin, other.coin)
        )


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.complex128)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _check_open(t: float, lo: float, hi: float, name: str) -> float:
    t = float(t)
    if not (lo < t < hi):
        raise DomainError(f"{name}(t) requires {lo:g} < t < {hi:g}, got t={t!r}")
    return t


def make_S(t: float) -> CoinModel:
    # The bottom-right entry is printed as sqrt(p)/sqrt(2) in the source; sqrt(t)/sqrt(2)
    # is the only value that keeps the rows orthonormal.
    t = _check_open(t, 0.0, 1.0, "S")
    a = np.sqrt(t / 2)
    b = np.sqrt((1 - t) / 2)
    u = np.array(
        [
            [a, a, b, b],
            [-a, a, -b, b],
            [b, -b, -a, a],
            [-b, -b, a, a],
        ]
    )
    return CoinModel(u, "S", t)


def make_A(t: float) -> CoinModel:
    t = _check_open(t, 0.0, 1.0 / np.sqrt(3.0), "A")
    s = np.sqrt(1 - 3 * t * t)
    u = np.array(
        [
            [t, t, t, s],
            [-t, t, -s, t],
            [t, -s, -t, t],
            [-s, -t, t, t],
        ]
    )
    return CoinModel(u, "A", t)


def make_B(t: float) -> CoinModel:
    """S(t) with its third row negated."""
    t = _check_open(t, 0.0, 1.0, "B")
    u = np.array(make_S(t).coin.real)
    u[2] = -u[2]
    return CoinModel(u, "B", t)


def make_grover() -> CoinModel:
    u = 0.5 * (2 * np.eye(4) - np.ones((4, 4)))
    return CoinModel(u, "grover", None)


def make_custom(u, tol: float = UNITARY_TOL) -> CoinModel:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (4, 4):
        raise ValueError(f"coin must be 4x4, got {u.shape}")
    dev = unitarity_defect(u)
    if dev > tol:
        raise NotUnitaryError(f"coin is not unitary: max |U^H U - I| = {dev:.3e} > {tol:g}")
    return CoinModel(u, "custom", None)


def builtin_models() -> dict[str, CoinModel]:
    """The five coins used throughout the acceptance runs."""
    return {
        "S(1/8)": make_S(1 / 8),
        "S(1/2)": make_S(1 / 2),
        "A(1/3)": make_A(1 / 3),
        "B(1/2)": make_B(1 / 2),
        "grover": make_grover(),
    }


# JSON descriptor ------------------------------------------------------------

_FAMILY_KEYS = {
    "S": {"family", "t"},
    "A": {"family", "t"},
    "B": {"family", "t"},
    "grover": {"family"},
    "custom": {"family", "coin"},
}


def from_descriptor(desc: dict, *, check_unitary: bool = True) -> CoinModel:
    """Build a model from ``{"family": ..., "t": ..., "coin": ...}``; unknown keys are rejected."""
    if not isinstance(desc, dict):
        raise ValueError("model descriptor must be a JSON object")
    fam = desc.get("family")
    if fam not in _FAMILY_KEYS:
        raise ValueError(f"unknown family {fam!r}; expected one of {sorted(_FAMILY_KEYS)}")
    extra = set(desc) - _FAMILY_KEYS[fam]
    if extra:
        raise ValueError(f"unknown field(s) for family {fam!r}: {sorted(extra)}")
    missing = _FAMILY_KEYS[fam] - set(desc)
    if missing:
        raise ValueError(f"missing field(s) for family {fam!r}: {sorted(missing)}")
    if fam == "S":
        return make_S(desc["t"])
    if fam == "A":
        return make_A(desc["t"])
    if fam == "B":
        return make_B(desc["t"])
    if fam == "grover":
        return make_grover()
    coin = desc["coin"]
    try:
        u = np.array([[complex(c[0], c[1]) for c in row] for row in coin], dtype=np.complex128)
    except (TypeError, IndexError) as exc:
        raise ValueError("coin must be a 4x4 array of [re, im] pairs") from exc
    if u.shape != (4, 4):
        raise ValueError(f"coin must be 4x4, got {u.shape}")
    if check_unitary:
        return make_custom(u)
    return CoinModel(u, "custom", None)


def load_model(source: str, *, check_unitary: bool = True) -> CoinModel:
    """Parse an inline JSON descriptor or read one from a file path."""
    text = source.strip()
    if not text.startswith("{"):
        text = Path(source).read_text()
    return from_descriptor(json.loads(text), check_unitary=check_unitary)
