"""Numerical tolerances and backend selection, kept in one place."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace

DISABLE_NUMBA_ENV = "QRW2D_DISABLE_NUMBA"


def numba_requested() -> bool:
    """True unless the pure-numpy path is forced through the environment."""
    return os.environ.get(DISABLE_NUMBA_ENV, "").strip().lower() not in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class Tolerances:
    newton_residual: float = 1e-10
    newton_max_iter: int = 40
    dedup: float = 1e-6
    k_degenerate: float = 1e-8
    k_inside: float = 1e-6
    singular_ball: float = 1e-3
    singular_grad: float = 1e-8
    outside_margin: float = 1e-2
    vertical_tangent: float = 1e-10
    root_gap: float = 1e-7
    seed_grid: int = 64
    seed_radius: float = 0.05

    def with_overrides(self, overrides: dict[str, float]) -> "Tolerances":
        known = {f.name: f.type for f in fields(self)}
        clean = {}
        for name, value in overrides.items():
            if name not in known:
                raise KeyError(f"unknown tolerance {name!r}; known: {sorted(known)}")
            clean[name] = int(value) if known[name] in (int, "int") else float(value)
        return replace(self, **clean)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
