"""Quantum random walks on the square lattice: exact evolution and stationary-phase asymptotics."""

from .model import (
    CoinModel,
    DomainError,
    NotUnitaryError,
    builtin_models,
    from_descriptor,
    load_model,
    make_A,
    make_B,
    make_custom,
    make_grover,
    make_S,
)
from .simulate import WaveField, amplitude_at, basis, evolve, probability_profile, step

__all__ = [
    "CoinModel",
    "DomainError",
    "NotUnitaryError",
    "WaveField",
    "amplitude_at",
    "basis",
    "builtin_models",
    "evolve",
    "from_descriptor",
    "load_model",
    "make_A",
    "make_B",
    "make_S",
    "make_custom",
    "make_grover",
    "probability_profile",
    "step",
]

__version__ = "0.1.0"
