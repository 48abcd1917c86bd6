"""Invariant battery run by ``qrw2d check``: one entry per property, each with its tolerance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import asymptotics, genfun, oracles, simulate, variety
from .config import DEFAULT_TOLERANCES, Tolerances
from .model import UNITARY_TOL, CoinModel

S_ENTRY_NOTE = (
    "S(t) coin: the (4,4) entry is taken as sqrt(t)/sqrt(2), the value that makes "
    "the matrix orthogonal"
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value,
                "threshold": self.threshold, "detail": self.detail}


def check_torality(model: CoinModel, samples: int = 10_000) -> CheckResult:
    rep = genfun.check_torality(model, samples)
    return CheckResult("torality", rep["max_deviation"] < 1e-8, rep["max_deviation"], 1e-8,
                       {"samples": samples})


def check_coin_unitary(model: CoinModel) -> CheckResult:
    d = model.unitarity_defect()
    return CheckResult("coin_unitary", d < UNITARY_TOL, d, UNITARY_TOL)


def check_norm(model: CoinModel, n: int = 100) -> CheckResult:
    field_ = simulate.evolve(model, simulate.basis(1), n)
    err = abs(field_.norm() ** 2 - 1.0)
    return CheckResult("probability_conserved", err < 1e-10, err, 1e-10, {"n": n})


def check_series(model: CoinModel, n_max: int = 6) -> CheckResult:
    worst = 0.0
    for n in range(n_max + 1):
        for j in range(1, 5):
            sim = simulate.evolve(model, simulate.basis(j), n).amps
            ref = oracles.matrix_power_field(model, simulate.basis(j), n)
            worst = max(worst, float(np.max(np.abs(sim - ref))))
    return CheckResult("series_oracle", worst <= 1e-12, worst, 1e-12, {"n_max": n_max})


def check_smoothness(model: CoinModel, grid_n: int = 64) -> CheckResult:
    g = variety.min_grad_norm(model, grid_n)
    return CheckResult("smooth_V1", g > 1e-3, g, 1e-3, {"grid": grid_n})


def check_b_singular(model: CoinModel, tol: Tolerances = DEFAULT_TOLERANCES) -> CheckResult:
    found = variety.singular_points(model, tol.singular_grad)
    expected = asymptotics._b_singular_points(model.t)
    worst = 0.0
    for e in expected:
        dist = min((np.max(variety.circ_dist(f.point.as_array(), e.as_array())) for f in found),
                   default=np.inf)
        worst = max(worst, float(dist))
    ok = len(found) == 4 and worst < 1e-6
    return CheckResult("B_singular_set", ok, worst, 1e-6, {"count": len(found)})


def check_symmetry(model: CoinModel) -> CheckResult:
    rep = variety.symmetry_check(model, 1000)
    ok = rep["max_residual"] < 1e-10 and rep["max_velocity_error"] < 1e-8
    return CheckResult("S_symmetries", ok, max(rep["max_residual"], rep["max_velocity_error"]),
                       1e-10, {"maps": rep["maps"]})


def sample_smooth_points(model: CoinModel, count: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 2 * np.pi, count)
    b = rng.uniform(0, 2 * np.pi, count)
    k = rng.integers(0, 4, count)
    g = variety.sheet_gammas(model, a, b)[np.arange(count), k]
    return a, b, g


def curvature_errors(model: CoinModel, count: int = 100, seed: int = 0) -> dict:
    a, b, g = sample_smooth_points(model, count, seed)
    kg = variety.graph_curvature(model, a, b, g)
    ki = variety.implicit_curvature(variety.real_section(model), a, b, g)
    ka = np.array([variety.area_ratio_curvature(model, a[i], b[i], g[i]) for i in range(count)])
    denom = np.abs(kg)
    return {
        "graph_vs_implicit": float(np.max(np.abs(kg - ki) / denom)),
        "graph_vs_area": float(np.max(np.abs(kg - ka) / denom)),
        "implicit_vs_area": float(np.max(np.abs(ki - ka) / np.abs(ki))),
    }


def check_curvature(model: CoinModel) -> CheckResult:
    e = curvature_errors(model)
    ok = e["graph_vs_implicit"] < 1e-6 and e["graph_vs_area"] < 1e-3 and e["implicit_vs_area"] < 1e-3
    return CheckResult("curvature_agreement", ok, e["graph_vs_implicit"], 1e-6, e)


def check_velocity_bound(model: CoinModel, grid_n: int = 64) -> CheckResult:
    cloud = asymptotics.feasible_region_image(model, grid_n)
    worst = float(np.max(np.abs(cloud.velocity))) if len(cloud) else 0.0
    return CheckResult("velocity_bound", worst <= 1 + 1e-9, worst, 1.0)


def run_suite(model: CoinModel, tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Run the battery; numerical checks downstream of a failed torality check are skipped."""
    results = [check_torality(model), check_coin_unitary(model)]
    notes = []
    if model.family == "S":
        notes.append(S_ENTRY_NOTE)
    if all(r.passed for r in results):
        results += [check_norm(model), check_series(model)]
        if model.family in ("S", "A"):
            results.append(check_smoothness(model))
        if model.family == "B":
            results.append(check_b_singular(model, tol))
        if model.family == "S":
            results.append(check_symmetry(model))
        if model.family in ("S", "A", "B"):
            results.append(check_curvature(model))
        results.append(check_velocity_bound(model))
    return {
        "model": model.label,
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
        "notes": notes,
    }
